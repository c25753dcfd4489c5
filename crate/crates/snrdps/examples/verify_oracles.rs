//! Runs the full brute-force verification suite and prints one line per
//! check, mirroring `snrdps verify`.
//!
//! ```bash
//! cargo run --release --example verify_oracles
//! ```
//!
//! Every analytic shortcut (the dial/actual factor two, the full-space
//! conjugation identities, the plus-branch closed form, the eigenvalue
//! monotonicity fact, the single-photon bound) is replayed against an
//! independent brute-force route, and each check's deliberately corrupted
//! twin must be caught.

use snrdps::verify::{run_suite, VerifyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reports = run_suite(&VerifyConfig::default())?;
    for r in &reports {
        println!("{r}");
    }
    let failures = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", reports.len(), failures);
    if failures > 0 {
        std::process::exit(1);
    }
    Ok(())
}
