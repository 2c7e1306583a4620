//! Samples a Poisson pattern on a box and on a torus and prints counts.

use abperc::{sample_poisson, Region, RegionKind};

fn main() -> abperc::Result<()> {
    let square = Region::square(2.0)?;
    let p = sample_poisson(square, 25.0, 7)?;
    println!("box side 2, intensity 25: {} points (mean {})", p.len(), 25.0 * square.volume());

    let torus = Region::new(RegionKind::Torus, 1.0, 3)?;
    let q = sample_poisson(torus, 200.0, 7)?;
    println!("3d torus, intensity 200: {} points", q.len());

    let mut csv = Vec::new();
    p.write_csv(&mut csv)?;
    for line in String::from_utf8_lossy(&csv).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
