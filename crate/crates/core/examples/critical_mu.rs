//! Critical B-intensity above and below the one-type threshold.

use abperc::percolation::{estimate_mu_c, BoxSetup, MuOptions, MuOutcome};

fn main() -> abperc::Result<()> {
    let lambda_c = 0.3591;
    let setup = BoxSetup::new(1.0, 15.0, 100, 5);
    for lambda in [2.0 * lambda_c, 0.5 * lambda_c] {
        let search = estimate_mu_c(&setup, lambda, 0.1, &MuOptions::default())?;
        match &search.outcome {
            MuOutcome::Finite(e) => {
                println!("lambda {lambda:.4}: mu_c ~ {:.3} in [{:.3}, {:.3}]", e.estimate, e.low, e.high)
            }
            MuOutcome::NoPercolation { mu_max, one_type_probability, .. } => println!(
                "lambda {lambda:.4}: no percolation up to mu = {mu_max:e} (one-type crossing {one_type_probability:.2})"
            ),
        }
    }
    Ok(())
}
