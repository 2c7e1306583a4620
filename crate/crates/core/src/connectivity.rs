//! Connectivity threshold of the AB random geometric graph on the unit square.
//!
//! `rho_threshold` is the smallest radius at which every type-A point lies in
//! one component of the bipartite graph, which is the smallest radius making
//! `G¹` connected. The normalized statistic `n·π·ρ²/log n` is expected to
//! approach `max(1/τ, 1/4)` as `n` grows with B-intensity `τ·n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::unit_ball_volume;
use crate::error::{Error, Result};
use crate::geomgraph::{build_bipartite, g1_has_isolated_vertex, NeighborGrid};
use crate::pointprocess::{CoupledSampler, PointPattern, Region, Stream};
use crate::rng::derive_seed;

/// Exact minimal radius `r` such that `G¹(X, Y, r)` is connected.
///
/// Returns `0` when `|X| <= 1` and `+inf` when `|X| >= 2` and `Y` is empty.
/// The result is always the distance of some A–B pair, computed as the
/// square root of its squared distance.
pub fn rho_threshold(x: &PointPattern, y: &PointPattern) -> Result<f64> {
    if !x.region().same_as(y.region()) {
        return Err(Error::param("patterns live in different regions"));
    }
    let m = x.len();
    if m <= 1 {
        return Ok(0.0);
    }
    if y.is_empty() {
        return Ok(f64::INFINITY);
    }
    let region = *x.region();
    let diameter = region.diameter();
    let mut cap = initial_cap(&region, m, y.len()).min(diameter);
    loop {
        if let Some(d2) = kruskal_within(x, y, cap)? {
            return Ok(d2.sqrt());
        }
        if cap >= diameter {
            // every pair was considered; unreachable with a nonempty Y
            return Ok(f64::INFINITY);
        }
        cap = (2.0 * cap).min(diameter);
    }
}

/// Heuristic first radius cap, about 1.5 times the expected threshold.
fn initial_cap(region: &Region, m: usize, k: usize) -> f64 {
    let ratio = (m as f64 / k as f64).max(0.25);
    let vol = 1.5 * ratio * (m as f64).ln().max(1.0) / (unit_ball_volume(region.dim) * m as f64);
    region.side * vol.powf(1.0 / region.dim as f64)
}

/// Kruskal sweep over A–B pairs at distance ≤ `cap`; returns the squared
/// distance at which all A points join one component, if that happens.
fn kruskal_within(x: &PointPattern, y: &PointPattern, cap: f64) -> Result<Option<f64>> {
    let m = x.len();
    let grid = NeighborGrid::new(y, cap)?;
    let mut pairs: Vec<(f64, u32, u32)> = Vec::new();
    for (i, p) in x.points().enumerate() {
        let before = pairs.len();
        grid.for_each_neighbor(p, |j, d2| pairs.push((d2, i as u32, j as u32)));
        if pairs.len() == before {
            return Ok(None);
        }
    }
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut sets = crate::geomgraph::DisjointSets::new(m + y.len());
    let mut a_count: Vec<u32> = (0..m + y.len()).map(|v| u32::from(v < m)).collect();
    for (d2, i, j) in pairs {
        let ra = sets.find(i as usize);
        let rb = sets.find(m + j as usize);
        if ra == rb {
            continue;
        }
        let total = a_count[ra] + a_count[rb];
        let root = sets.union(ra, rb).expect("distinct roots");
        a_count[root] = total;
        if total as usize == m {
            return Ok(Some(d2));
        }
    }
    Ok(None)
}

/// `n·π·ρ²/log n`.
pub fn lln_statistic(n: f64, rho: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::domain(format!("statistic needs n >= 2, got {n}")));
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::param(format!("rho must be nonnegative, got {rho}")));
    }
    Ok(n * PI * rho * rho / n.ln())
}

/// Limit of the normalized statistic for B/A intensity ratio `tau`.
pub fn lln_limit(tau: f64) -> f64 {
    (1.0 / tau).max(0.25)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdSample {
    pub n: f64,
    pub tau: f64,
    pub trial: u64,
    pub rho: f64,
    pub statistic: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: f64,
    pub tau: f64,
    pub trials: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl CellSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepTable {
    pub samples: Vec<ThresholdSample>,
    pub summary: Vec<CellSummary>,
}

impl SweepTable {
    pub fn cell(&self, n: f64, tau: f64) -> Option<&CellSummary> {
        self.summary.iter().find(|c| c.n == n && c.tau == tau)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub n_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn trial_samplers(seed: u64, trial: u64) -> (CoupledSampler, CoupledSampler, u64) {
    let trial_seed = derive_seed(seed, &[trial]);
    let region = Region::unit_square();
    (CoupledSampler::new(region, trial_seed, Stream::A), CoupledSampler::new(region, trial_seed, Stream::B), trial_seed)
}

/// Runs `rho_threshold` for each `(n, τ, trial)` on the unit square.
///
/// Each trial owns one coupled pair of samplers, so all grid cells of a
/// trial are prefixes of the same realization: `P_n` and `Q_{τn}`.
pub fn lln_sweep(config: &SweepConfig) -> Result<SweepTable> {
    if let Some(n) = config.n_grid.iter().find(|&&n| !(n >= 2.0)) {
        return Err(Error::domain(format!("sweep needs every n >= 2, got {n}")));
    }
    if let Some(t) = config.tau_grid.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::param(format!("tau must be positive, got {t}")));
    }
    let per_trial: Vec<Vec<ThresholdSample>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (mut a, mut b, trial_seed) = trial_samplers(config.seed, trial);
            let mut rows = Vec::new();
            for &n in &config.n_grid {
                let x = a.coupled_prefix(n)?;
                for &tau in &config.tau_grid {
                    let y = b.coupled_prefix(tau * n)?;
                    let rho = rho_threshold(&x, &y)?;
                    let statistic = if rho.is_finite() { lln_statistic(n, rho)? } else { f64::INFINITY };
                    rows.push(ThresholdSample { n, tau, trial, rho, statistic, seed: trial_seed });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut samples: Vec<ThresholdSample> = per_trial.into_iter().flatten().collect();
    // grid order, then trial
    let n_pos = |n: f64| config.n_grid.iter().position(|&v| v == n).unwrap();
    let t_pos = |t: f64| config.tau_grid.iter().position(|&v| v == t).unwrap();
    samples.sort_by_key(|s| (n_pos(s.n), t_pos(s.tau), s.trial));

    let mut summary = Vec::new();
    if config.trials > 0 {
        for &n in &config.n_grid {
            for &tau in &config.tau_grid {
                let mut stats: Vec<f64> =
                    samples.iter().filter(|s| s.n == n && s.tau == tau).map(|s| s.statistic).collect();
                stats.sort_by(f64::total_cmp);
                summary.push(CellSummary {
                    n,
                    tau,
                    trials: stats.len(),
                    median: quantile(&stats, 0.5),
                    q1: quantile(&stats, 0.25),
                    q3: quantile(&stats, 0.75),
                });
            }
        }
    }
    Ok(SweepTable { samples, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinDegreeReport {
    pub n: f64,
    pub tau: f64,
    pub alpha: f64,
    /// Radius solving `n·π·r²/log n = alpha`.
    pub radius: f64,
    pub trials: u64,
    pub zero_count: u64,
    /// `None` when no trials were run.
    pub fraction: Option<f64>,
}

/// Radius `r` with `n·π·r²/log n = alpha`.
pub fn radius_for_statistic(n: f64, alpha: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::domain(format!("radius needs n >= 2, got {n}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    Ok((alpha * n.ln() / (n * PI)).sqrt())
}

/// Fraction of trials in which `G¹(n, τ, r_n)` has minimum degree zero.
pub fn min_degree_diagnostic(n: f64, tau: f64, alpha: f64, trials: u64, seed: u64) -> Result<MinDegreeReport> {
    if !(tau > 0.0) {
        return Err(Error::param(format!("tau must be positive, got {tau}")));
    }
    let radius = radius_for_statistic(n, alpha)?;
    let zeros: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (mut a, mut b, _) = trial_samplers(seed, trial);
            let x = a.coupled_prefix(n)?;
            let y = b.coupled_prefix(tau * n)?;
            if x.is_empty() {
                return Err(Error::domain("minimum degree of an empty A pattern"));
            }
            Ok(g1_has_isolated_vertex(&build_bipartite(&x, &y, radius)?))
        })
        .collect::<Result<_>>()?;
    let zero_count = zeros.iter().filter(|&&z| z).count() as u64;
    Ok(MinDegreeReport {
        n,
        tau,
        alpha,
        radius,
        trials,
        zero_count,
        fraction: (trials > 0).then(|| zero_count as f64 / trials as f64),
    })
}
