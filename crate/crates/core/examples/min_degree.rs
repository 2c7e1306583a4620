//! How often G1 has an isolated vertex below and above the threshold radius.

use abperc::connectivity::min_degree_diagnostic;

fn main() -> abperc::Result<()> {
    for alpha in [0.5, 1.0, 3.0] {
        let r = min_degree_diagnostic(2e4, 1.0, alpha, 20, 17)?;
        println!("alpha {alpha}: radius {:.5}, min degree zero in {}/{} trials", r.radius, r.zero_count, r.trials);
    }
    Ok(())
}
