//! Asymptotic key rate vs fiber length for the SNRDPS protocol and the
//! round-robin baseline with the same number of delays.
//!
//! ```bash
//! cargo run --release --example key_rate_scan
//! ```
//!
//! Reproduces the headline comparison: at a 2% bit error rate the
//! (L, |R|) = (32, 10) protocol beats the (11, 10) round-robin variant at
//! every distance, and the rate falls off as `η^{3/2}` (0.03 decades per
//! km at 0.2 dB/km) once two-photon events carry part of the key.

use snrdps::bounds::PhaseErrorBounds;
use snrdps::rate::{scan_rrdps, scan_snrdps, ChannelModel, KmGrid, LeakageMinimizer, RateConfig};
use snrdps::ProtocolParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ProtocolParams::new(32, 5)?;
    let e_bit = 0.02;
    let channel = ChannelModel::default();
    let cfg = RateConfig::default();
    let grid = KmGrid::new(0.0, 200.0, 1.0)?;

    let bounds = PhaseErrorBounds::new(&params)?;
    let minimizer = LeakageMinimizer::new(&bounds, &cfg);
    let snrdps = scan_snrdps(&minimizer, &channel, e_bit, &grid, &cfg)?;
    let rrdps = scan_rrdps(params.delay_count(), &channel, e_bit, &grid, &cfg)?;

    println!(
        "e_bit = {e_bit}, eta0 = {}, {} dB/km",
        channel.detector_efficiency, channel.attenuation_db_per_km
    );
    println!(
        "{:>5} {:>14} {:>14} {:>8}",
        "km", "G snrdps(32,10)", "G rrdps(11,10)", "ratio"
    );
    for i in (0..snrdps.len()).step_by(20) {
        let (s, r) = (&snrdps[i], &rrdps[i]);
        println!(
            "{:>5} {:>14.4e} {:>14.4e} {:>8.2}",
            s.fiber_km,
            s.rate,
            r.rate,
            if r.rate > 0.0 { s.rate / r.rate } else { f64::NAN }
        );
    }

    // fitted decay over the last 30 km
    let tail: Vec<(f64, f64)> = snrdps
        .iter()
        .filter(|p| p.fiber_km >= 170.0 && p.rate > 0.0)
        .map(|p| (p.fiber_km, p.rate.log10()))
        .collect();
    let n = tail.len() as f64;
    let sx: f64 = tail.iter().map(|p| p.0).sum();
    let sy: f64 = tail.iter().map(|p| p.1).sum();
    let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    println!("\nlong-distance slope d(log10 G)/d(km) = {slope:.4} (eta^(3/2) gives -0.030)");
    Ok(())
}
