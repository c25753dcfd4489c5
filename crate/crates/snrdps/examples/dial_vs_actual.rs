//! The dial measurement equals the actual one up to a factor-two
//! detection loss: `Pr_dial[s ∧ (i,j) | r'] = 2·Pr_actual[s ∧ (i,j)]`
//! when the actual delay is drawn evenly from `{r', L−r'}`.
//!
//! ```bash
//! cargo run --example dial_vs_actual
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snrdps::linalg::SymOperator;
use snrdps::povm::{prob_actual_mixed, prob_dial};
use snrdps::ProtocolParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ProtocolParams::new(5, 2)?;
    let l = params.block_len();

    // a random single-photon density operator (mixture of pure states)
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rho = SymOperator::zeros(l);
    for _ in 0..l {
        let mut v: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        for i in 0..l {
            for j in i..l {
                rho.add_sym(i, j, v[i] * v[j] / l as f64);
            }
        }
    }

    println!("L = {l}, delays {:?}, random mixed state", params.delays());
    println!(
        "{:>3} {:>2} {:>7} {:>12} {:>12} {:>10}",
        "r'", "s", "(i,j)", "dial", "2*actual", "diff"
    );
    let mut worst = 0.0f64;
    for r in params.delays() {
        for s in 0..2u8 {
            for i in 1..l {
                for j in (i + 1)..=l {
                    let d = prob_dial(&rho, &params, r, s, (i, j))?;
                    let a = prob_actual_mixed(&rho, &params, r, s, (i, j))?;
                    if d == 0.0 && a == 0.0 {
                        continue;
                    }
                    worst = worst.max((d - 2.0 * a).abs());
                    println!(
                        "{r:>3} {s:>2} ({i},{j})  {d:>12.8} {:>12.8} {:>10.2e}",
                        2.0 * a,
                        d - 2.0 * a
                    );
                }
            }
        }
    }
    println!("\nworst |dial - 2*actual| = {worst:.2e}");
    Ok(())
}
