use crate::error::{Error, Result};
use crate::pointprocess::{PointPattern, RegionKind};

/// Highest dimension the cell list supports.
pub const MAX_DIM: usize = 8;

/// Largest `t` such that `sqrt(t) <= r` in floating point.
///
/// Comparing squared distances against this value is exactly equivalent to
/// comparing `sqrt(d2) <= r`, which keeps the closed-ball predicate
/// consistent with radii reported as square roots of squared distances.
pub fn closed_ball_d2(r: f64) -> f64 {
    if r <= 0.0 {
        return if r == 0.0 { 0.0 } else { -1.0 };
    }
    if r.is_infinite() {
        return f64::INFINITY;
    }
    let mut t = r * r;
    while t > 0.0 && t.sqrt() > r {
        t = t.next_down();
    }
    while t.next_up().is_finite() && t.next_up().sqrt() <= r {
        t = t.next_up();
    }
    t
}

/// Cell list over one pattern for fixed-radius neighbor queries.
///
/// Cell side is at least the query radius, so a query only visits the
/// `3^d` cells around the query cell (fewer on a small torus).
#[derive(Debug)]
pub struct NeighborGrid<'a> {
    pattern: &'a PointPattern,
    radius: f64,
    ball_d2: f64,
    cells_per_axis: usize,
    cell_side: f64,
    cell_start: Vec<u32>,
    entries: Vec<u32>,
}

impl<'a> NeighborGrid<'a> {
    pub fn new(pattern: &'a PointPattern, radius: f64) -> Result<Self> {
        let region = *pattern.region();
        let dim = region.dim;
        if dim > MAX_DIM {
            return Err(Error::param(format!("neighbor grid supports dim <= {MAX_DIM}, got {dim}")));
        }
        if !(radius > 0.0) || radius.is_nan() {
            return Err(Error::param(format!("query radius must be positive, got {radius}")));
        }
        if pattern.len() >= u32::MAX as usize {
            return Err(Error::Resource(format!("{} points exceed the grid index width", pattern.len())));
        }
        // Enough cells to keep buckets small, never so many that empty cells dominate.
        let budget = (4 * pattern.len()).max(16) as f64;
        let max_per_axis = budget.powf(1.0 / dim as f64).floor().max(1.0);
        let mut n = (region.side / radius).floor().clamp(1.0, max_per_axis) as usize;
        while n > 1 && region.side / (n as f64) < radius {
            n -= 1;
        }
        let cell_side = region.side / n as f64;

        let total = n.pow(dim as u32);
        let mut counts = vec![0u32; total + 1];
        let cell_of: Vec<usize> = pattern.points().map(|p| linear_cell(p, cell_side, n)).collect();
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for c in 0..total {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut entries = vec![0u32; pattern.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            entries[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Ok(NeighborGrid {
            pattern,
            radius,
            ball_d2: closed_ball_d2(radius),
            cells_per_axis: n,
            cell_side,
            cell_start: counts,
            entries,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Calls `f(index, squared_distance)` for every indexed point within the
    /// grid radius of `query` (closed ball, region metric).
    pub fn for_each_neighbor<F: FnMut(usize, f64)>(&self, query: &[f64], mut f: F) {
        let region = self.pattern.region();
        let dim = region.dim;
        let n = self.cells_per_axis;
        let torus = region.kind == RegionKind::Torus;

        let mut cand = [[0usize; 3]; MAX_DIM];
        let mut cand_len = [0usize; MAX_DIM];
        for k in 0..dim {
            let c = axis_cell(query[k], self.cell_side, n) as isize;
            let mut len = 0;
            for off in -1isize..=1 {
                let mut v = c + off;
                if torus {
                    v = v.rem_euclid(n as isize);
                } else if v < 0 || v >= n as isize {
                    continue;
                }
                let v = v as usize;
                if !cand[k][..len].contains(&v) {
                    cand[k][len] = v;
                    len += 1;
                }
            }
            cand_len[k] = len;
        }

        let mut idx = [0usize; MAX_DIM];
        loop {
            let mut cell = 0usize;
            for k in (0..dim).rev() {
                cell = cell * n + cand[k][idx[k]];
            }
            let (lo, hi) = (self.cell_start[cell] as usize, self.cell_start[cell + 1] as usize);
            for &j in &self.entries[lo..hi] {
                let j = j as usize;
                let d2 = region.dist2(query, self.pattern.point(j));
                if d2 <= self.ball_d2 {
                    f(j, d2);
                }
            }
            // odometer over the per-axis candidate lists
            let mut k = 0;
            loop {
                if k == dim {
                    return;
                }
                idx[k] += 1;
                if idx[k] < cand_len[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

#[inline]
fn axis_cell(x: f64, cell_side: f64, n: usize) -> usize {
    ((x / cell_side) as usize).min(n - 1)
}

#[inline]
fn linear_cell(p: &[f64], cell_side: f64, n: usize) -> usize {
    p.iter().rev().fold(0, |acc, &x| acc * n + axis_cell(x, cell_side, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::{sample_poisson, Region};

    #[test]
    fn ball_threshold_matches_sqrt_predicate() {
        for &r in &[1e-3, 0.1, 0.3, 0.7, 1.0, 2.0, 1234.5678] {
            let t = closed_ball_d2(r);
            assert!(t.sqrt() <= r);
            assert!(t.next_up().sqrt() > r);
        }
        assert_eq!(closed_ball_d2(0.0), 0.0);
    }

    fn brute(p: &PointPattern, q: &[f64], r: f64) -> Vec<usize> {
        (0..p.len()).filter(|&j| p.region().dist2(q, p.point(j)).sqrt() <= r).collect()
    }

    #[test]
    fn grid_matches_brute_force_box_and_torus() {
        for kind in [RegionKind::Box, RegionKind::Torus] {
            for dim in 1..=3 {
                let region = Region::new(kind, 2.0, dim).unwrap();
                let p = sample_poisson(region, 30.0, 5 + dim as u64).unwrap();
                for &r in &[0.05, 0.3, 0.9, 1.5] {
                    let grid = NeighborGrid::new(&p, r).unwrap();
                    assert!(grid.cell_side() >= r);
                    for i in 0..p.len().min(40) {
                        let mut got = Vec::new();
                        grid.for_each_neighbor(p.point(i), |j, _| got.push(j));
                        got.sort_unstable();
                        assert_eq!(got, brute(&p, p.point(i), r), "{kind:?} d={dim} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_radius() {
        let p = PointPattern::empty(Region::unit_square());
        assert!(NeighborGrid::new(&p, 0.0).is_err());
        assert!(NeighborGrid::new(&p, f64::NAN).is_err());
    }
}
