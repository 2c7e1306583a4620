//! Exact connectivity threshold of G1 and its normalized statistic.

use abperc::connectivity::{lln_limit, lln_statistic, rho_threshold};
use abperc::geomgraph::is_connected_g1;
use abperc::{CoupledSampler, Region, Stream};

fn main() -> abperc::Result<()> {
    let n = 5000.0;
    for tau in [1.0, 4.0] {
        let x = CoupledSampler::new(Region::unit_square(), 3, Stream::A).coupled_prefix(n)?;
        let y = CoupledSampler::new(Region::unit_square(), 3, Stream::B).coupled_prefix(tau * n)?;
        let rho = rho_threshold(&x, &y)?;
        assert!(is_connected_g1(&x, &y, rho)?);
        assert!(!is_connected_g1(&x, &y, rho.next_down())?);
        println!("tau {tau}: rho = {rho:.5}, statistic {:.3} (limit {})", lln_statistic(n, rho)?, lln_limit(tau));
    }
    Ok(())
}
