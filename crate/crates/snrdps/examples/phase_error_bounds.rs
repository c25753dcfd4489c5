//! Phase-error upper bounds vs bit error rate for a few delay-set sizes.
//!
//! ```bash
//! cargo run --release --example phase_error_bounds
//! ```
//!
//! For one photon the bound is the closed form
//! `min{(|R|+1)/(|R|−1)·e_b, 1/2 + 1/(2|R|)}`; for two photons it is the
//! concave envelope over the two eigenvalue branches. The round-robin
//! reference value is the constant `ν/|R|`.

use snrdps::bounds::PhaseErrorBounds;
use snrdps::ProtocolParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let block_len = 32;
    println!("block length L = {block_len}");
    for t in [1usize, 2, 5] {
        let params = ProtocolParams::new(block_len, t)?;
        let card = params.delay_count();
        let bounds = PhaseErrorBounds::new(&params)?;
        println!("\n|R| = {card} (delays {:?})", params.delays());
        println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "e_bit", "nu=1", "rr nu=1", "nu=2", "rr nu=2");
        for i in 0..=10 {
            let x = 0.05 * i as f64;
            println!(
                "{x:>8.3} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                bounds.bound(1, x),
                1.0 / card as f64,
                bounds.bound(2, x),
                2.0 / card as f64,
            );
        }
    }
    Ok(())
}
