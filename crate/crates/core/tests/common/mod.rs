//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use abperc::{PointPattern, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn dist(region: &Region, a: &[f64], b: &[f64]) -> f64 {
    region.dist2(a, b).sqrt()
}

/// Adjacency matrix of G1 by direct enumeration of common B-neighbors.
pub fn g1_matrix(x: &PointPattern, y: &PointPattern, r: f64) -> Vec<Vec<bool>> {
    let region = x.region();
    let m = x.len();
    let mut adj = vec![vec![false; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let joined = y.points().any(|b| dist(region, x.point(i), b) <= r && dist(region, x.point(j), b) <= r);
            adj[i][j] = joined;
            adj[j][i] = joined;
        }
    }
    adj
}

pub fn matrix_connected(adj: &[Vec<bool>]) -> bool {
    let m = adj.len();
    if m <= 1 {
        return true;
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..m {
            if adj[v][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Smallest A–B distance at which G1 is connected, by scanning all candidates.
pub fn rho_by_scan(x: &PointPattern, y: &PointPattern) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let region = x.region();
    let mut cands: Vec<f64> = x.points().flat_map(|a| y.points().map(move |b| dist(region, a, b))).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // connectivity is monotone in r, so binary search the candidate list
    let (mut lo, mut hi) = (0usize, cands.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matrix_connected(&g1_matrix(x, y, cands[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands.get(lo).copied().unwrap_or(f64::INFINITY)
}

/// Uniform points on a lattice of spacing `1/grid`, so that ties are common.
pub fn lattice_pattern(region: Region, n: usize, grid: u32, rng: &mut ChaCha8Rng) -> PointPattern {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..region.dim).map(|_| region.side * rng.random_range(0..grid) as f64 / grid as f64).collect())
        .collect();
    PointPattern::from_points(region, &pts).unwrap()
}

pub fn uniform_pattern(region: Region, n: usize, rng: &mut ChaCha8Rng) -> PointPattern {
    let pts: Vec<Vec<f64>> =
        (0..n).map(|_| (0..region.dim).map(|_| region.side * rng.random::<f64>()).collect()).collect();
    PointPattern::from_points(region, &pts).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper-tail probability of a chi-square variable, via the regularized gamma function.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof).unwrap().sf(stat)
}
