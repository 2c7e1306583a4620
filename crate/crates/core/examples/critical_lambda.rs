//! Crossing-probability bisection for the one-type critical intensity.
//!
//! Pass `--full` for the 400-trial, side-30 run (a few seconds in release mode).

use abperc::percolation::{estimate_lambda_c, BoxSetup};

fn main() -> abperc::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let (side, trials, tol) = if full { (30.0, 400, 0.02) } else { (15.0, 100, 0.05) };
    let setup = BoxSetup::new(1.0, side, trials, 2024);
    let search = estimate_lambda_c(&setup, tol, None)?;
    for p in &search.probes {
        println!("lambda {:.4}: {}/{} crossed", p.value, p.successes, p.trials);
    }
    let e = &search.estimate;
    println!("lambda_c ~ {:.4} in [{:.4}, {:.4}]", e.estimate, e.low, e.high);
    Ok(())
}
