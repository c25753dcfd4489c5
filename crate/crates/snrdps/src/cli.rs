//! Command-line front end: bound curves, rate/intensity scans and the
//! verification suite, all emitting deterministic CSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::PhaseErrorBounds;
use crate::error::{invalid, Result};
use crate::povm::ProtocolParams;
use crate::rate::{
    scan_rrdps, scan_snrdps, ChannelModel, KmGrid, LeakageMinimizer, RateConfig, RatePoint,
};
use crate::verify::{run_suite, VerifyConfig};

/// Security bounds and key rates for the SNRDPS QKD protocol.
#[derive(Parser, Debug)]
#[command(name = "snrdps", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase-error bound curves vs bit error rate (CSV)
    Bounds(BoundsArgs),
    /// Key-rate and optimal-intensity scan over fiber length (CSV)
    Rate(RateArgs),
    /// Run the brute-force verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Block length (pulses per block)
    #[arg(long = "L", default_value_t = 32)]
    block_len: usize,
    /// Half-delay count; the delay set is {1..t} ∪ {L−t..L−1}
    #[arg(long = "t", default_value_t = 1)]
    half_delays: usize,
    /// Photon number(s) to emit curves for (1 and/or 2)
    #[arg(long = "nu", default_values_t = [1u32, 2])]
    nu: Vec<u32>,
    /// Bit-error samples per curve
    #[arg(long, default_value_t = 400)]
    samples: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Append the constant round-robin reference column nu/|R|
    #[arg(long)]
    rrdps_ref: bool,
    /// Also write a plain plot script next to the CSV
    #[arg(long)]
    plot_script: bool,
    /// Random seed (recorded; the bound curves are deterministic)
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Protocol {
    Snrdps,
    Rrdps,
    Both,
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Block length (pulses per block)
    #[arg(long = "L", default_value_t = 32)]
    block_len: usize,
    /// Half-delay count; |R| = 2t
    #[arg(long = "t", default_value_t = 1)]
    half_delays: usize,
    /// Bit error rate
    #[arg(long, default_value_t = 0.02)]
    ebit: f64,
    /// Detector efficiency η₀
    #[arg(long, default_value_t = 0.1)]
    eta0: f64,
    /// Fiber attenuation in dB/km
    #[arg(long, default_value_t = 0.2)]
    atten_db_km: f64,
    #[arg(long, default_value_t = 0.0)]
    km_min: f64,
    #[arg(long, default_value_t = 200.0)]
    km_max: f64,
    #[arg(long, default_value_t = 1.0)]
    km_step: f64,
    /// Which protocol(s) to scan; the round-robin baseline uses block
    /// length |R|+1
    #[arg(long, value_enum, default_value_t = Protocol::Both)]
    protocol: Protocol,
    /// γ-grid size override
    #[arg(long, default_value_t = 128)]
    gamma_count: usize,
    /// μ-grid size override
    #[arg(long, default_value_t = 128)]
    mu_count: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Also write a plain plot script next to the CSV
    #[arg(long)]
    plot_script: bool,
    /// Random seed (recorded; the scan is deterministic)
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only the named checks (repeatable); all checks when omitted
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Clamp the block lengths used by the full-space checks
    #[arg(long = "L")]
    max_block: Option<usize>,
    /// Trials for the randomized checks
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Seed for the randomized checks (printed in every report)
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Optional CSV report path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corrupt the constructions under test (the suite must then fail)
    #[arg(long, hide = true)]
    corrupt: bool,
}

/// Parses `args` and runs the requested subcommand, returning the exit
/// code (clap prints and exits by itself on usage errors).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Bounds(a) => cmd_bounds(&a).map(|()| 0),
        Command::Rate(a) => cmd_rate(&a).map(|()| 0),
        Command::Verify(a) => cmd_verify(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// 12 significant digits, `.` decimal separator.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Resolves relative output paths against `SNRDPS_OUT_DIR` when set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("SNRDPS_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let params = ProtocolParams::new(args.block_len, args.half_delays)?;
    let mut nus = args.nu.clone();
    nus.sort_unstable();
    nus.dedup();
    if nus.is_empty() || nus.iter().any(|&nu| !(nu == 1 || nu == 2)) {
        return Err(invalid("--nu accepts only the analyzed photon numbers 1 and 2"));
    }
    if args.samples < 2 {
        return Err(invalid("--samples must be at least 2"));
    }
    let bounds = PhaseErrorBounds::new(&params)?;
    let card = params.delay_count();
    let mut csv = String::new();
    csv.push_str("e_bit,e_ph_bound,nu,L,cardR");
    if args.rrdps_ref {
        csv.push_str(",rrdps_ref");
    }
    csv.push('\n');
    for &nu in &nus {
        for (x, y) in bounds.curve_samples(nu, args.samples) {
            csv.push_str(&format!(
                "{},{},{},{},{}",
                fmt12(x),
                fmt12(y),
                nu,
                params.block_len(),
                card
            ));
            if args.rrdps_ref {
                csv.push(',');
                csv.push_str(&fmt12(nu as f64 / card as f64));
            }
            csv.push('\n');
        }
    }
    let out = resolve_out(&args.out);
    write_text(&out, &csv)?;
    if args.plot_script {
        write_text(&out.with_extension("plot.py"), &bounds_plot_script(&out))?;
    }
    Ok(())
}

fn rate_rows(points: &[RatePoint], block_len: usize, protocol: &str, csv: &mut String) {
    for p in points {
        let (mu, lmu) = match p.mu_opt {
            Some(mu) => (fmt12(mu), fmt12(block_len as f64 * mu)),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt12(p.fiber_km),
            fmt12(p.eta),
            mu,
            lmu,
            fmt12(p.detection),
            fmt12(p.q0),
            fmt12(p.q1),
            fmt12(p.q2),
            fmt12(p.q_tail),
            fmt12(p.rate_raw),
            fmt12(p.rate),
            protocol
        ));
    }
}

fn cmd_rate(args: &RateArgs) -> Result<()> {
    let params = ProtocolParams::new(args.block_len, args.half_delays)?;
    if !(0.0..0.5).contains(&args.ebit) {
        return Err(invalid("--ebit must lie in [0, 0.5)"));
    }
    let channel = ChannelModel::new(args.eta0, args.atten_db_km)?;
    let grid = KmGrid::new(args.km_min, args.km_max, args.km_step)?;
    let cfg = RateConfig {
        gamma_count: args.gamma_count.max(2),
        mu_count: args.mu_count.max(2),
        ..RateConfig::default()
    };
    let mut csv = String::from("km,eta,mu_opt,L_mu,Q,q0,q1,q2,qtail,G_raw,G,protocol\n");
    if matches!(args.protocol, Protocol::Snrdps | Protocol::Both) {
        let bounds = PhaseErrorBounds::new(&params)?;
        let minimizer = LeakageMinimizer::new(&bounds, &cfg);
        let pts = scan_snrdps(&minimizer, &channel, args.ebit, &grid, &cfg)?;
        rate_rows(&pts, params.block_len(), "snrdps", &mut csv);
    }
    if matches!(args.protocol, Protocol::Rrdps | Protocol::Both) {
        let card = params.delay_count();
        let pts = scan_rrdps(card, &channel, args.ebit, &grid, &cfg)?;
        rate_rows(&pts, card + 1, "rrdps", &mut csv);
    }
    let out = resolve_out(&args.out);
    write_text(&out, &csv)?;
    if args.plot_script {
        write_text(&out.with_extension("plot.py"), &rate_plot_script(&out))?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let cfg = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        max_block: args.max_block,
        checks: args.checks.clone(),
        corrupt: args.corrupt,
        negative_controls: true,
    };
    let reports = run_suite(&cfg)?;
    for r in &reports {
        println!("{r}");
    }
    let failures = reports.iter().filter(|r| !r.pass).count();
    println!(
        "{} checks, {} failed",
        reports.len(),
        failures
    );
    if let Some(out) = &args.out {
        let mut csv = String::from("check,instance,max_deviation,tolerance,pass,seed\n");
        for r in &reports {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.name,
                r.instance.replace(',', ";"),
                fmt12(r.max_deviation),
                fmt12(r.tolerance),
                r.pass,
                r.seed
            ));
        }
        write_text(&resolve_out(out), &csv)?;
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn csv_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data.csv".into())
}

fn bounds_plot_script(csv_path: &Path) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots the phase-error bound curves emitted by `snrdps bounds`.
import csv
from collections import defaultdict
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{name}")))
by_nu = defaultdict(list)
for r in rows:
    by_nu[r["nu"]].append((float(r["e_bit"]), float(r["e_ph_bound"])))
fig, ax = plt.subplots()
for nu, pts in sorted(by_nu.items()):
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"nu={{nu}}")
if rows and "rrdps_ref" in rows[0]:
    for nu, pts in sorted(by_nu.items()):
        ref = [float(r["rrdps_ref"]) for r in rows if r["nu"] == nu][0]
        ax.axhline(ref, linestyle="--", alpha=0.5)
ax.set_xlabel("bit error rate")
ax.set_ylabel("phase error bound")
ax.legend()
fig.savefig("{name}.png", dpi=160)
"#,
        name = csv_name(csv_path)
    )
}

fn rate_plot_script(csv_path: &Path) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots the key-rate and optimal-intensity scans emitted by `snrdps rate`.
import csv
from collections import defaultdict
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{name}")))
rate = defaultdict(list)
intensity = defaultdict(list)
for r in rows:
    km = float(r["km"])
    if float(r["G"]) > 0.0:
        rate[r["protocol"]].append((km, float(r["G"])))
    if r["L_mu"]:
        intensity[r["protocol"]].append((km, float(r["L_mu"])))
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 8), sharex=True)
for proto, pts in sorted(rate.items()):
    ax1.semilogy([p[0] for p in pts], [p[1] for p in pts], label=proto)
for proto, pts in sorted(intensity.items()):
    ax2.semilogy([p[0] for p in pts], [p[1] for p in pts], label=proto)
ax1.set_ylabel("key rate per pulse")
ax2.set_ylabel("optimal block intensity L*mu")
ax2.set_xlabel("fiber length [km]")
ax1.legend()
fig.savefig("{name}.png", dpi=160)
"#,
        name = csv_name(csv_path)
    )
}
