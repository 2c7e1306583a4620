//! Explicit upper bound on the critical B-intensity as lambda approaches lambda_c.

use abperc::bounds::{mu_bound_optimized, BoundInputs};

fn main() -> abperc::Result<()> {
    let lambda_c = 0.35911;
    println!("{:>8} {:>7} {:>12} {:>12} {:>10}", "delta", "alpha", "mu_hat", "exact", "normalized");
    for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
        let report = mu_bound_optimized(&BoundInputs::new(2, 1.0, lambda_c + delta, lambda_c))?;
        let exact = report.mu_hat_exact.map(|m| format!("{m:12.4e}")).unwrap_or_else(|| format!("{:>12}", "-"));
        println!("{delta:>8} {:>7.4} {:>12.4e} {exact} {:>10.3}", report.alpha_opt, report.mu_hat, report.normalized());
    }
    Ok(())
}
