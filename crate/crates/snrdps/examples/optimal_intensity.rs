//! Optimal block intensity `L·μ` vs fiber length for (L, |R|) = (32, 2).
//!
//! ```bash
//! cargo run --release --example optimal_intensity
//! ```
//!
//! The optimizer switches from the single-photon regime (`μ ~ η`) to the
//! two-photon regime (`μ ~ η^{1/2}`) at one distance; the jump in the
//! optimal intensity marks exactly where the rate scaling changes from
//! `η²` to `η^{3/2}`.

use snrdps::bounds::PhaseErrorBounds;
use snrdps::rate::{scan_snrdps, ChannelModel, KmGrid, LeakageMinimizer, RateConfig};
use snrdps::ProtocolParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ProtocolParams::new(32, 1)?;
    let channel = ChannelModel::default();
    let cfg = RateConfig::default();
    let bounds = PhaseErrorBounds::new(&params)?;
    let minimizer = LeakageMinimizer::new(&bounds, &cfg);
    let grid = KmGrid::new(0.0, 60.0, 1.0)?;
    let points = scan_snrdps(&minimizer, &channel, 0.02, &grid, &cfg)?;

    println!("(L, |R|) = (32, 2), e_bit = 2%");
    println!("{:>5} {:>12} {:>12} {:>10}", "km", "L*mu", "G", "q2");
    let mut prev: Option<f64> = None;
    for p in &points {
        let Some(mu) = p.mu_opt else { continue };
        let lmu = 32.0 * mu;
        let jumped = prev.is_some_and(|q| (lmu / q).log10().abs() > 0.25);
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>10.4}{}",
            p.fiber_km,
            lmu,
            p.rate,
            p.q2,
            if jumped { "   <- intensity jump" } else { "" }
        );
        prev = Some(lmu);
    }
    Ok(())
}
