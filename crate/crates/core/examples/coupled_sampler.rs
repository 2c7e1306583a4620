//! Nested patterns: the intensity-a pattern is a prefix of the intensity-b one.

use abperc::{CoupledSampler, Region, Stream};

fn main() -> abperc::Result<()> {
    let mut s = CoupledSampler::new(Region::unit_square(), 42, Stream::A);
    let big = s.coupled_prefix(1000.0)?;
    for lambda in [10.0, 100.0, 500.0, 1000.0] {
        let p = s.coupled_prefix(lambda)?;
        assert_eq!(p.coords(), &big.coords()[..p.coords().len()]);
        println!("lambda {lambda:>6}: {} points", p.len());
    }

    // stream B from the same seed is independent of stream A
    let mut b = CoupledSampler::new(Region::unit_square(), 42, Stream::B);
    println!("stream B at 1000: {} points", b.coupled_prefix(1000.0)?.len());
    Ok(())
}
