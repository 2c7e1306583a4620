//! Discretization onto `εZ^d` and the coupled Bernoulli site fields.
//!
//! On a finite window of lattice sites we draw `T_u ~ Bernoulli(p_λ)` and,
//! for every ordered pair `(u, v)` with `0 < |u - v| ≤ t`, an independent
//! `U_{u,v} ~ Bernoulli((p_ν/p_λ)^(1/Δ))`. Then
//!
//! ```text
//! V_u = T_u · Π_v U_{u,v}          (v over the t-ball of u)
//! W_v = 1 - Π_u (1 - U_{u,v})      (u over the t-ball of v)
//! ```
//!
//! so that `V ~ Bernoulli(p_ν)`, `W ~ Bernoulli(q)` with
//! `q = 1 - (1 - (p_ν/p_λ)^(1/Δ))^Δ`, and `V_u = 1` forces `W_v = 1` for
//! every `v` in the t-ball of `u`. Sites closer than `⌈t/ε⌉` to the window
//! edge have truncated balls and are excluded from marginal statistics.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::bounds::{delta_count, MAX_LATTICE_EXTENT};
use crate::error::{Error, Result};
use crate::pointprocess::PointPattern;
use crate::rng::rng_from_seed;

/// Lattice sites occupied by a point pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupiedSites {
    /// Integer coordinates `k`, standing for the site `εk`.
    pub sites: BTreeSet<Vec<i64>>,
    /// Set when `ε` does not divide the box side, so the last cells stick out of the box.
    pub truncated: bool,
}

/// Site `z` is occupied iff the pattern has a point in `z + [0, ε)^d`.
pub fn discretize(pattern: &PointPattern, epsilon: f64) -> Result<OccupiedSites> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    let side = pattern.region().side;
    let cells = (side / epsilon).round();
    let truncated = (cells * epsilon - side).abs() > 1e-12 * side;
    let sites = pattern.points().map(|p| p.iter().map(|&x| (x / epsilon).floor() as i64).collect()).collect();
    Ok(OccupiedSites { sites, truncated })
}

/// Nonzero integer offsets `k` with `|εk| ≤ t`, in lexicographic order.
pub fn ball_offsets(t: f64, epsilon: f64, dim: usize) -> Result<Vec<Vec<i64>>> {
    let extent = (t / epsilon).ceil();
    if !(extent.is_finite() && extent >= 0.0) || dim == 0 {
        return Err(Error::param(format!("bad lattice ball: t={t}, epsilon={epsilon}, d={dim}")));
    }
    if extent > MAX_LATTICE_EXTENT {
        return Err(Error::Resource(format!("lattice ball extent {extent} too large")));
    }
    let k = extent as i64;
    let t2 = t * t;
    let mut out = Vec::new();
    let mut cur = vec![-k; dim];
    loop {
        let norm2: f64 = cur.iter().map(|&c| (epsilon * c as f64) * (epsilon * c as f64)).sum();
        if norm2 <= t2 && cur.iter().any(|&c| c != 0) {
            out.push(cur.clone());
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            if cur[axis] < k {
                cur[axis] += 1;
                break;
            }
            cur[axis] = -k;
        }
    }
}

fn within(a: &[i64], b: &[i64], t: f64, epsilon: f64) -> bool {
    let n2: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let c = epsilon * (x - y) as f64;
            c * c
        })
        .sum();
    n2 <= t * t
}

/// `u ~ v` iff some lattice site `w` has `|w - u| ≤ t` and `|w - v| ≤ t`.
pub fn site_related(u: &[i64], v: &[i64], t: f64, epsilon: f64) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::param("sites have different dimensions"));
    }
    if !within(u, v, 2.0 * t, epsilon) {
        return Ok(false);
    }
    if within(u, v, t, epsilon) {
        return Ok(true);
    }
    let offsets = ball_offsets(t, epsilon, u.len())?;
    Ok(offsets.iter().any(|off| {
        let w: Vec<i64> = u.iter().zip(off).map(|(a, b)| a + b).collect();
        within(&w, v, t, epsilon)
    }))
}

/// One realization of `T`, `U`, `V`, `W` on a rectangular window of sites.
#[derive(Clone, Debug)]
pub struct SiteField {
    extents: Vec<usize>,
    epsilon: f64,
    t: f64,
    p_lambda: f64,
    p_nu: f64,
    delta: u64,
    u_param: f64,
    offsets: Vec<Vec<i64>>,
    margin: usize,
    t_bits: Vec<bool>,
    u_bits: Vec<bool>,
    v_bits: Vec<bool>,
    w_bits: Vec<bool>,
}

/// Interior success counts of one field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MarginalCounts {
    pub sites: u64,
    pub t_ones: u64,
    pub v_ones: u64,
    pub w_ones: u64,
}

impl std::ops::AddAssign for MarginalCounts {
    fn add_assign(&mut self, o: Self) {
        self.sites += o.sites;
        self.t_ones += o.t_ones;
        self.v_ones += o.v_ones;
        self.w_ones += o.w_ones;
    }
}

/// Samples the coupled fields on the window `Π [0, extents[i])` of `εZ^d`.
pub fn sample_coupled_fields(
    extents: &[usize],
    epsilon: f64,
    t: f64,
    p_lambda: f64,
    p_nu: f64,
    seed: u64,
) -> Result<SiteField> {
    if !(p_nu > 0.0 && p_nu <= p_lambda && p_lambda <= 1.0) {
        return Err(Error::param(format!("need 0 < p_nu <= p_lambda <= 1, got p_nu={p_nu}, p_lambda={p_lambda}")));
    }
    if !(t > 0.0 && epsilon > 0.0) {
        return Err(Error::param(format!("need t > 0 and epsilon > 0, got t={t}, epsilon={epsilon}")));
    }
    let dim = extents.len();
    let delta = delta_count(t, epsilon, dim)?;
    if delta == 0 {
        return Err(Error::param(format!("t={t} is below the lattice spacing {epsilon}")));
    }
    let offsets = ball_offsets(t, epsilon, dim)?;
    debug_assert_eq!(offsets.len() as u64, delta);
    let margin = (t / epsilon).ceil() as usize;
    if extents.iter().any(|&e| e <= 2 * margin) {
        return Err(Error::param(format!("window {extents:?} has no interior sites for margin {margin}")));
    }

    let n_sites: usize = extents.iter().product();
    let nb = offsets.len();
    let u_param = (p_nu / p_lambda).powf(1.0 / delta as f64);
    let mut rng = rng_from_seed(seed);

    let mut field = SiteField {
        extents: extents.to_vec(),
        epsilon,
        t,
        p_lambda,
        p_nu,
        delta,
        u_param,
        offsets,
        margin,
        t_bits: vec![false; n_sites],
        u_bits: vec![false; n_sites * nb],
        v_bits: vec![false; n_sites],
        w_bits: vec![false; n_sites],
    };

    // One pass in site order: T_u, then U_{u,u+o} for each in-window offset.
    for site in 0..n_sites {
        field.t_bits[site] = rng.random_bool(p_lambda);
        let coords = field.coords(site);
        for k in 0..nb {
            if field.shifted(&coords, k, 1).is_some() {
                field.u_bits[site * nb + k] = rng.random_bool(u_param);
            }
        }
    }
    for site in 0..n_sites {
        let coords = field.coords(site);
        let mut v = field.t_bits[site];
        let mut w = false;
        for k in 0..nb {
            if field.shifted(&coords, k, 1).is_some() {
                v &= field.u_bits[site * nb + k];
            }
            // U_{u,v} with u = v - o
            if let Some(u) = field.shifted(&coords, k, -1) {
                w |= field.u_bits[u * nb + k];
            }
        }
        field.v_bits[site] = v;
        field.w_bits[site] = w;
    }
    Ok(field)
}

impl SiteField {
    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn site_count(&self) -> usize {
        self.t_bits.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `Δ`, the t-ball size on the infinite lattice.
    pub fn delta(&self) -> u64 {
        self.delta
    }

    /// Success probability of each `U_{u,v}`.
    pub fn u_param(&self) -> f64 {
        self.u_param
    }

    pub fn p_lambda(&self) -> f64 {
        self.p_lambda
    }

    pub fn p_nu(&self) -> f64 {
        self.p_nu
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        self.extents
            .iter()
            .map(|&e| {
                let c = rest % e;
                rest /= e;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.extents).rev().fold(0, |acc, (&c, &e)| acc * e + c)
    }

    /// Index of `coords + sign·offsets[k]`, if it lies in the window.
    fn shifted(&self, coords: &[usize], k: usize, sign: i64) -> Option<usize> {
        let mut idx = 0usize;
        for axis in (0..coords.len()).rev() {
            let c = coords[axis] as i64 + sign * self.offsets[k][axis];
            if c < 0 || c >= self.extents[axis] as i64 {
                return None;
            }
            idx = idx * self.extents[axis] + c as usize;
        }
        Some(idx)
    }

    pub fn is_interior(&self, site: usize) -> bool {
        self.coords(site).iter().zip(&self.extents).all(|(&c, &e)| c >= self.margin && c + self.margin < e)
    }

    pub fn t_bit(&self, site: usize) -> bool {
        self.t_bits[site]
    }

    pub fn v_bit(&self, site: usize) -> bool {
        self.v_bits[site]
    }

    pub fn w_bit(&self, site: usize) -> bool {
        self.w_bits[site]
    }

    /// `U_{u, u + offsets[k]}`; false when the target is outside the window.
    pub fn u_bit(&self, site: usize, k: usize) -> bool {
        self.u_bits[site * self.offsets.len() + k]
    }

    /// Checks `V_u = 1 ⇒ W_v = 1` for every in-window `v` in the t-ball of
    /// every site `u`; returns the number of violations.
    pub fn implication_violations(&self) -> usize {
        (0..self.site_count())
            .filter(|&u| self.v_bits[u])
            .map(|u| {
                let coords = self.coords(u);
                (0..self.offsets.len()).filter_map(|k| self.shifted(&coords, k, 1)).filter(|&v| !self.w_bits[v]).count()
            })
            .sum()
    }

    pub fn interior_counts(&self) -> MarginalCounts {
        let mut c = MarginalCounts::default();
        for site in (0..self.site_count()).filter(|&s| self.is_interior(s)) {
            c.sites += 1;
            c.t_ones += u64::from(self.t_bits[site]);
            c.v_ones += u64::from(self.v_bits[site]);
            c.w_ones += u64::from(self.w_bits[site]);
        }
        c
    }

    /// Dumps `k1..kd,interior,T,V,W` per site.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let cols: Vec<String> = (1..=self.extents.len()).map(|i| format!("k{i}")).collect();
        writeln!(out, "{},interior,T,V,W", cols.join(","))?;
        for site in 0..self.site_count() {
            let coords: Vec<String> = self.coords(site).iter().map(|c| c.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                coords.join(","),
                u8::from(self.is_interior(site)),
                u8::from(self.t_bits[site]),
                u8::from(self.v_bits[site]),
                u8::from(self.w_bits[site]),
            )?;
        }
        Ok(())
    }
}

/// Exact two-sided binomial p-value for `successes` out of `trials` at rate `p`.
pub fn binomial_two_sided_p(successes: u64, trials: u64, p: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return if successes == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if successes == trials { 1.0 } else { 0.0 };
    }
    let dist = Binomial::new(p, trials).expect("valid binomial");
    let lower = dist.cdf(successes);
    let upper = if successes == 0 { 1.0 } else { dist.sf(successes - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}
