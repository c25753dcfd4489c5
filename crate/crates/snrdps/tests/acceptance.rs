//! Acceptance gate: every claim the artifact stands on, one line each.
//!
//! Criteria run sequentially inside one test so that the timed ones are
//! not skewed by parallel load; shared curves and scans are built once.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use snrdps::bounds::PhaseErrorBounds;
use snrdps::rate::{
    scan_rrdps, scan_snrdps, ChannelModel, KmGrid, LeakageMinimizer, RateConfig, RatePoint,
};
use snrdps::verify;
use snrdps::ProtocolParams;

const BLOCK: usize = 32;
const SEED: u64 = 7;

/// Scan key: (half-delay count, bit error rate in basis points).
type ScanKey = (usize, u32);

struct Ctx {
    bounds: BTreeMap<usize, PhaseErrorBounds>,
    snrdps: BTreeMap<ScanKey, Vec<RatePoint>>,
    rrdps: BTreeMap<ScanKey, Vec<RatePoint>>,
    cfg: RateConfig,
    channel: ChannelModel,
}

fn ebit_of(key_bp: u32) -> f64 {
    key_bp as f64 / 10_000.0
}

impl Ctx {
    fn build() -> Self {
        let cfg = RateConfig::default();
        let channel = ChannelModel::default();
        let grid = KmGrid::new(0.0, 200.0, 1.0).unwrap();
        let mut bounds = BTreeMap::new();
        for t in 1..=5usize {
            let p = ProtocolParams::new(BLOCK, t).unwrap();
            bounds.insert(t, PhaseErrorBounds::new(&p).unwrap());
        }
        let mut snrdps = BTreeMap::new();
        let mut rrdps = BTreeMap::new();
        let snrdps_keys: Vec<ScanKey> = vec![
            (1, 200),
            (1, 500),
            (2, 200),
            (2, 500),
            (3, 200),
            (3, 500),
            (4, 200),
            (4, 500),
            (5, 200),
            (5, 500),
        ];
        for key in snrdps_keys {
            let minimizer = LeakageMinimizer::new(&bounds[&key.0], &cfg);
            let pts =
                scan_snrdps(&minimizer, &channel, ebit_of(key.1), &grid, &cfg).unwrap();
            snrdps.insert(key, pts);
        }
        for t in 2..=5usize {
            for bp in [200u32, 500] {
                let pts =
                    scan_rrdps(2 * t, &channel, ebit_of(bp), &grid, &cfg).unwrap();
                rrdps.insert((t, bp), pts);
            }
        }
        Self {
            bounds,
            snrdps,
            rrdps,
            cfg,
            channel,
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

/// Least-squares slope of `log10(rate)` against km over `[lo, hi]`.
/// `None` when any rate in the window is nonpositive.
fn log_slope(points: &[RatePoint], lo: f64, hi: f64) -> Option<f64> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.fiber_km >= lo - 1e-9 && p.fiber_km <= hi + 1e-9)
        .map(|p| (p.fiber_km, p.rate))
        .collect();
    if sel.len() < 3 || sel.iter().any(|&(_, g)| g <= 0.0) {
        return None;
    }
    let n = sel.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, g) in &sel {
        let y = g.log10();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// First km at which the optimal block intensity jumps by more than a
/// quarter decade between adjacent grid points.
fn intensity_jump_km(points: &[RatePoint]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].mu_opt?, w[1].mu_opt?);
        ((b / a).log10().abs() > 0.25).then_some(w[1].fiber_km)
    })
}

/// First km at which the centered local slope of `log10 G` rises above
/// `threshold` after having been below it.
fn slope_change_km(points: &[RatePoint], threshold: f64) -> Option<f64> {
    let mut prev_below = false;
    for i in 2..points.len() - 2 {
        let (g_lo, g_hi) = (points[i - 2].rate, points[i + 2].rate);
        if g_lo <= 0.0 || g_hi <= 0.0 {
            continue;
        }
        let s = (g_hi.log10() - g_lo.log10())
            / (points[i + 2].fiber_km - points[i - 2].fiber_km);
        if s >= threshold && prev_below {
            return Some(points[i].fiber_km);
        }
        prev_below = s < threshold;
    }
    None
}

fn criterion_1_dial_vs_actual(_: &Ctx) -> Outcome {
    let start = Instant::now();
    let report = match verify::verify_dial_vs_actual(8, 100, SEED, false) {
        Ok(r) => r,
        Err(e) => return fail(format!("check errored: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    if report.pass && secs < 5.0 {
        ok(format!(
            "max |Pr_dial - 2 Pr_actual| = {:.2e} < 1e-12 in {secs:.2} s",
            report.max_deviation
        ))
    } else {
        fail(format!(
            "dev {:.2e}, elapsed {secs:.2} s (budget 5 s)",
            report.max_deviation
        ))
    }
}

fn criterion_2_fullspace_conjugation(_: &Ctx) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (l, t) in [(4usize, 1usize), (5, 1), (5, 2), (6, 2)] {
        match verify::verify_fullspace_conjugation(l, t, false) {
            Ok(r) if r.pass => worst = worst.max(r.max_deviation),
            Ok(r) => return fail(format!("(L={l}, t={t}) deviates by {:.2e}", r.max_deviation)),
            Err(e) => return fail(format!("(L={l}, t={t}) errored: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs < 10.0 {
        ok(format!(
            "both conjugation identities elementwise within {worst:.2e} in {secs:.2} s"
        ))
    } else {
        fail(format!("elapsed {secs:.2} s (budget 10 s)"))
    }
}

fn criterion_3_plus_closed_form(_: &Ctx) -> Outcome {
    match verify::verify_plus_branch_closed_form(false) {
        Ok(r) if r.pass => ok(format!(
            "analytic vs exhaustive within {:.2e} (tol 1e-9)",
            r.max_deviation
        )),
        Ok(r) => fail(format!("deviation {:.2e} > 1e-9", r.max_deviation)),
        Err(e) => fail(format!("check errored: {e}")),
    }
}

fn criterion_4_single_photon_bound(_: &Ctx) -> Outcome {
    match verify::verify_single_photon_bound(false) {
        Ok(r) if r.pass => ok(format!(
            "generic pipeline matches the closed form within {:.2e}",
            r.max_deviation
        )),
        Ok(r) => fail(format!("deviation {:.2e}", r.max_deviation)),
        Err(e) => fail(format!("check errored: {e}")),
    }
}

fn criterion_5_curve_ordering(ctx: &Ctx) -> Outcome {
    // nonincreasing in |R| at every grid point up to 0.2, nu in {1, 2}
    for i in 0..=160 {
        let x = 0.2 * i as f64 / 160.0;
        for nu in [1u32, 2] {
            for t in 1..=4usize {
                let lo = ctx.bounds[&t].bound(nu, x);
                let hi = ctx.bounds[&(t + 1)].bound(nu, x);
                if hi > lo + 1e-12 {
                    return fail(format!(
                        "nu={nu}: bound grows from |R|={} to |R|={} at e_bit={x:.4} ({lo:.6} -> {hi:.6})",
                        2 * t,
                        2 * t + 2
                    ));
                }
            }
        }
    }
    // |R| = 10, nu = 1, e_bit = 0.05: 11/9 * 0.05 = 0.0611 < 0.1
    let v = ctx.bounds[&5].bound(1, 0.05);
    if (v - 11.0 / 9.0 * 0.05).abs() > 1e-12 || v >= 0.1 {
        return fail(format!("|R|=10 bound at 0.05 is {v:.6}, expected 0.0611 < 0.1"));
    }
    ok("bounds nonincreasing in |R|; snrdps 0.0611 < rrdps 0.1 at e_bit=0.05".to_string())
}

fn criterion_6_scaling(ctx: &Ctx) -> Outcome {
    // (32,10) at 2%: eta^{3/2} at long distance => -0.03 per km
    let ten = &ctx.snrdps[&(5, 200)];
    let Some(slope10) = log_slope(ten, 170.0, 200.0) else {
        return fail("(32,10) rate not positive over the last 30 km");
    };
    if (slope10 + 0.03).abs() > 0.003 {
        return fail(format!("(32,10) long slope {slope10:.4}, want -0.030 +- 0.003"));
    }
    // (32,2) at 2%: eta^2 before the intensity jump, eta^{3/2} after
    let two = &ctx.snrdps[&(1, 200)];
    let Some(jump) = intensity_jump_km(two) else {
        return fail("(32,2) shows no intensity jump");
    };
    let Some(short) = log_slope(two, (jump - 27.0).max(0.0), jump - 5.0) else {
        return fail("(32,2) rate not positive before the jump");
    };
    let Some(long) = log_slope(two, 170.0, 200.0) else {
        return fail("(32,2) rate not positive over the last 30 km");
    };
    if (short + 0.04).abs() > 0.004 {
        return fail(format!("(32,2) short slope {short:.4}, want -0.040 +- 0.004"));
    }
    if (long + 0.03).abs() > 0.003 {
        return fail(format!("(32,2) long slope {long:.4}, want -0.030 +- 0.003"));
    }
    ok(format!(
        "(32,10) long {slope10:.4}; (32,2) short {short:.4} / long {long:.4} (jump at {jump} km)"
    ))
}

fn criterion_7_positive_rate(ctx: &Ctx) -> Outcome {
    let pts = &ctx.snrdps[&(1, 500)];
    match pts.iter().find(|p| p.rate > 0.0) {
        Some(p) => ok(format!(
            "|R|=2 at e_bit=5%: G = {:.3e} at {} km",
            p.rate, p.fiber_km
        )),
        None => fail("|R|=2 at e_bit=5% yields no positive rate"),
    }
}

fn criterion_8_protocol_ordering(ctx: &Ctx) -> Outcome {
    for bp in [200u32, 500] {
        for t in 2..=5usize {
            let snrdps = &ctx.snrdps[&(t, bp)];
            let rrdps = &ctx.rrdps[&(t, bp)];
            for (s, r) in snrdps.iter().zip(rrdps) {
                if (s.rate > 0.0 || r.rate > 0.0) && s.rate + 1e-15 < r.rate {
                    return fail(format!(
                        "rrdps ({}, {}) beats snrdps (32, {}) at {} km, e_bit {} ({:.3e} > {:.3e})",
                        2 * t + 1,
                        2 * t,
                        2 * t,
                        s.fiber_km,
                        ebit_of(bp),
                        r.rate,
                        s.rate
                    ));
                }
            }
        }
    }
    if let Some(p) = ctx.rrdps[&(2, 500)].iter().find(|p| p.rate != 0.0) {
        return fail(format!(
            "rrdps (5,4) at e_bit=5% gives G = {:.3e} at {} km, expected 0",
            p.rate, p.fiber_km
        ));
    }
    ok("snrdps >= rrdps at every km for |R| in {4,6,8,10}; rrdps (5,4)@5% is zero")
}

fn criterion_9_jump_matches_slope_change(ctx: &Ctx) -> Outcome {
    let two = &ctx.snrdps[&(1, 200)];
    let Some(jump) = intensity_jump_km(two) else {
        return fail("(32,2) shows no intensity jump");
    };
    let Some(change) = slope_change_km(two, -0.035) else {
        return fail("(32,2) shows no slope change");
    };
    if (jump - change).abs() <= 2.0 {
        ok(format!(
            "intensity jump at {jump} km, slope change at {change} km (|diff| <= 2)"
        ))
    } else {
        fail(format!(
            "intensity jump at {jump} km vs slope change at {change} km"
        ))
    }
}

fn criterion_10_performance(ctx: &Ctx) -> Outcome {
    // full (32,10) scan, 0..200 km at 1 km steps, envelope build included
    let start = Instant::now();
    let p = ProtocolParams::new(BLOCK, 5).unwrap();
    let bounds = match PhaseErrorBounds::new(&p) {
        Ok(b) => b,
        Err(e) => return fail(format!("bounds build failed: {e}")),
    };
    let minimizer = LeakageMinimizer::new(&bounds, &ctx.cfg);
    let grid = KmGrid::new(0.0, 200.0, 1.0).unwrap();
    if let Err(e) = scan_snrdps(&minimizer, &ctx.channel, 0.02, &grid, &ctx.cfg) {
        return fail(format!("scan failed: {e}"));
    }
    let scan_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let suite = match verify::run_suite(&verify::VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => return fail(format!("suite failed: {e}")),
    };
    let verify_secs = start.elapsed().as_secs_f64();
    let all_pass = suite.iter().all(|r| r.pass);
    if scan_secs < 60.0 && verify_secs < 120.0 && all_pass {
        ok(format!(
            "rate scan {scan_secs:.1} s (< 60 s); verification suite {verify_secs:.1} s (< 120 s), all {} checks pass",
            suite.len()
        ))
    } else {
        fail(format!(
            "scan {scan_secs:.1} s, suite {verify_secs:.1} s, all pass: {all_pass}"
        ))
    }
}

type CriterionFn = fn(&Ctx) -> Outcome;

#[test]
fn acceptance_criteria() {
    let ctx = Ctx::build();
    let criteria: [(usize, &str, CriterionFn); 10] = [
        (1, "dial measurement equals twice the actual", criterion_1_dial_vs_actual),
        (2, "full-space conjugation identities", criterion_2_fullspace_conjugation),
        (3, "plus-branch closed form vs brute force", criterion_3_plus_closed_form),
        (4, "single-photon bound closed form", criterion_4_single_photon_bound),
        (5, "bound-curve ordering in |R|", criterion_5_curve_ordering),
        (6, "key-rate scaling exponents", criterion_6_scaling),
        (7, "positive rate at 5% with |R|=2", criterion_7_positive_rate),
        (8, "snrdps vs rrdps ordering", criterion_8_protocol_ordering),
        (9, "intensity jump matches slope change", criterion_9_jump_matches_slope_change),
        (10, "desk-scale performance", criterion_10_performance),
    ];
    let mut all = true;
    for (id, name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&ctx)))
            .unwrap_or_else(|_| fail("panicked"));
        println!(
            "criterion {id:2}: {} — {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        all &= outcome.pass;
    }
    assert!(all, "at least one acceptance criterion failed");
}
