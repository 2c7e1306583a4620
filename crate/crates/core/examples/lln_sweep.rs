//! Median of the normalized threshold over a small (n, tau) grid.

use abperc::connectivity::{lln_limit, lln_sweep, SweepConfig};

fn main() -> abperc::Result<()> {
    let table =
        lln_sweep(&SweepConfig { n_grid: vec![1e3, 1e4], tau_grid: vec![1.0, 4.0, 16.0], trials: 10, seed: 11 })?;
    println!("{:>8} {:>5} {:>8} {:>8} {:>6}", "n", "tau", "median", "iqr", "limit");
    for c in &table.summary {
        println!("{:>8} {:>5} {:>8.3} {:>8.3} {:>6}", c.n, c.tau, c.median, c.iqr(), lln_limit(c.tau));
    }
    Ok(())
}
