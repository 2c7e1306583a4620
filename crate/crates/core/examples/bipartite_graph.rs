//! Builds the AB graph and the induced graphs G1 and G2, then checks crossing.

use abperc::geomgraph::{
    build_bipartite, build_g1, build_g2, components, crossing_exists, is_connected_g1, min_degree, Adjacency,
};
use abperc::{sample_poisson, Region};

fn main() -> abperc::Result<()> {
    let region = Region::square(10.0)?;
    let x = sample_poisson(region, 1.5, 1)?;
    let y = sample_poisson(region, 3.0, 2)?;
    let r = 0.8;

    let bip = build_bipartite(&x, &y, r)?;
    let comps = components(&bip);
    println!("A={} B={} edges={} components={}", x.len(), y.len(), bip.edge_count(), comps.count);

    let g1 = build_g1(&x, &y, r)?;
    let g2 = build_g2(&x, &y, r)?;
    println!("G1: {} edges, min degree {}", g1.edge_count(), min_degree(&g1)?);
    println!("G2: {} edges", g2.edge_count());
    println!("G1 connected: {}", is_connected_g1(&x, &y, r)?);
    println!("left-right crossing: {}", crossing_exists(&bip, 0)?);
    Ok(())
}
