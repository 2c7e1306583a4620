//! Finite-box estimates of critical intensities.
//!
//! Percolation is proxied by a left-to-right crossing of the box `[0, L)^d`.
//! Each trial owns a fixed seed, and intensities are realized with
//! [`CoupledSampler`] prefixes, so a trial's crossing indicator is
//! nondecreasing in the probed intensity. Bisection reuses the same trials
//! at every probe and remembers, per trial, the largest failing and the
//! smallest succeeding value already seen; probes inside those bounds are
//! answered without simulation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geomgraph::{build_bipartite, build_unigraph, crossing_exists};
use crate::pointprocess::{CoupledSampler, PointPattern, Region, RegionKind, Stream};
use crate::rng::derive_seed;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Box geometry and trial budget shared by all estimators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxSetup {
    pub dim: usize,
    /// AB connection radius; the one-type graph uses `2r`.
    pub r: f64,
    pub side: f64,
    pub trials: u64,
    pub seed: u64,
    /// Largest pattern a single evaluation may sample.
    pub max_points: f64,
}

impl BoxSetup {
    pub fn new(r: f64, side: f64, trials: u64, seed: u64) -> Self {
        BoxSetup { dim: 2, r, side, trials, seed, max_points: 4e6 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::param(format!("percolation needs d >= 2, got {}", self.dim)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::param(format!("r must be positive, got {}", self.r)));
        }
        if !(self.side >= 4.0 * self.r) {
            return Err(Error::param(format!("box side {} is below 4r = {}", self.side, 4.0 * self.r)));
        }
        if self.trials == 0 {
            return Err(Error::param("need at least one trial"));
        }
        Ok(())
    }

    fn region(&self) -> Result<Region> {
        Region::new(RegionKind::Box, self.side, self.dim)
    }

    fn trial_seed(&self, trial: u64) -> u64 {
        derive_seed(self.seed, &[trial])
    }

    fn sample(&self, trial: u64, stream: Stream, intensity: f64) -> Result<PointPattern> {
        let region = self.region()?;
        let expected = intensity * region.volume();
        if expected > self.max_points {
            return Err(Error::Resource(format!(
                "intensity {intensity} needs ~{expected:.3e} points, limit {:.3e}",
                self.max_points
            )));
        }
        CoupledSampler::new(region, self.trial_seed(trial), stream).coupled_prefix(intensity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    /// `G(P_λ, 2r)`.
    OneType { lambda: f64 },
    /// `G(P_λ, Q_μ, r)`.
    Ab { lambda: f64, mu: f64 },
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Fraction of crossing trials at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub value: f64,
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProbeRecord {
    fn new(value: f64, successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        ProbeRecord { value, trials, successes, probability: successes as f64 / trials as f64, ci_low, ci_high }
    }
}

fn one_type_crosses(x: &PointPattern, r: f64) -> Result<bool> {
    crossing_exists(&build_unigraph(x, 2.0 * r)?, 0)
}

fn ab_crosses(x: &PointPattern, y: &PointPattern, r: f64) -> Result<bool> {
    crossing_exists(&build_bipartite(x, y, r)?, 0)
}

/// Crossing frequency for one model over `setup.trials` seeded trials.
pub fn crossing_probability(model: Model, setup: &BoxSetup) -> Result<ProbeRecord> {
    setup.validate()?;
    let (value, lambda, mu) = match model {
        Model::OneType { lambda } => (lambda, lambda, None),
        Model::Ab { lambda, mu } => (mu, lambda, Some(mu)),
    };
    let hits: Vec<bool> = (0..setup.trials)
        .into_par_iter()
        .map(|trial| {
            let x = setup.sample(trial, Stream::A, lambda)?;
            match mu {
                None => one_type_crosses(&x, setup.r),
                Some(mu) => ab_crosses(&x, &setup.sample(trial, Stream::B, mu)?, setup.r),
            }
        })
        .collect::<Result<_>>()?;
    Ok(ProbeRecord::new(value, hits.iter().filter(|&&h| h).count() as u64, setup.trials))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Lambda,
    Mu,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalEstimate {
    pub parameter: Parameter,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub side: f64,
    pub dim: usize,
    pub trials: u64,
    pub target: f64,
    pub r: f64,
    /// The fixed A-intensity when estimating `μ`.
    pub companion_lambda: Option<f64>,
}

impl CriticalEstimate {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// Per-trial knowledge of a monotone indicator.
#[derive(Clone, Debug)]
struct TrialBounds {
    fail_max: f64,
    success_min: f64,
}

impl Default for TrialBounds {
    fn default() -> Self {
        TrialBounds { fail_max: f64::NEG_INFINITY, success_min: f64::INFINITY }
    }
}

/// Evaluates a monotone per-trial indicator across probes with common seeds.
struct Prober<F> {
    bounds: Vec<TrialBounds>,
    indicator: F,
    log: Vec<ProbeRecord>,
}

impl<F> Prober<F>
where
    F: Fn(u64, f64) -> Result<bool> + Sync,
{
    fn new(trials: u64, indicator: F) -> Self {
        Prober { bounds: vec![TrialBounds::default(); trials as usize], indicator, log: Vec::new() }
    }

    fn probe(&mut self, value: f64) -> Result<f64> {
        let indicator = &self.indicator;
        let hits: Vec<bool> = self
            .bounds
            .par_iter_mut()
            .enumerate()
            .map(|(trial, b)| {
                if value <= b.fail_max {
                    return Ok(false);
                }
                if value >= b.success_min {
                    return Ok(true);
                }
                let hit = indicator(trial as u64, value)?;
                if hit {
                    b.success_min = value;
                } else {
                    b.fail_max = value;
                }
                if b.fail_max >= b.success_min {
                    return Err(Error::Estimation {
                        message: format!("crossing indicator of trial {trial} is not monotone"),
                        diagnostics: vec![format!("fail at {}, success at {}", b.fail_max, b.success_min)],
                    });
                }
                Ok(hit)
            })
            .collect::<Result<_>>()?;
        let successes = hits.iter().filter(|&&h| h).count() as u64;
        let record = ProbeRecord::new(value, successes, self.bounds.len() as u64);
        let p = record.probability;
        self.log.push(record);
        Ok(p)
    }

    fn diagnostics(&self) -> Vec<String> {
        self.log.iter().map(|p| format!("value {} -> {}/{}", p.value, p.successes, p.trials)).collect()
    }

    /// Bisects `[lo, hi]` (already known to bracket `target`) down to width `tol`.
    fn bisect(&mut self, mut lo: f64, mut hi: f64, tol: f64, target: f64) -> Result<(f64, f64)> {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.probe(mid)? >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((lo, hi))
    }
}

/// Result of a critical-intensity search with its probe log.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaSearch {
    pub estimate: CriticalEstimate,
    pub probes: Vec<ProbeRecord>,
}

/// Default initial `λ` bracket, scaled as `r^-d`.
pub fn default_lambda_bracket(r: f64, dim: usize) -> (f64, f64) {
    let scale = r.powi(-(dim as i32));
    (0.02 * scale, 2.0 * scale)
}

/// Bisects on `λ` for the one-type graph `G(P_λ, 2r)` until the bracket on
/// the crossing-probability-0.5 point has width at most `tol`.
pub fn estimate_lambda_c(setup: &BoxSetup, tol: f64, bracket: Option<(f64, f64)>) -> Result<LambdaSearch> {
    setup.validate()?;
    let (lo, hi) = bracket.unwrap_or_else(|| default_lambda_bracket(setup.r, setup.dim));
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::param(format!("bad bracket ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let target = 0.5;
    let mut prober =
        Prober::new(setup.trials, |trial, lambda| one_type_crosses(&setup.sample(trial, Stream::A, lambda)?, setup.r));
    let p_lo = prober.probe(lo)?;
    let p_hi = prober.probe(hi)?;
    if !(p_lo < target && p_hi >= target) {
        return Err(Error::Estimation {
            message: format!("initial bracket ({lo}, {hi}) does not straddle crossing probability {target}"),
            diagnostics: prober.diagnostics(),
        });
    }
    let (lo, hi) = prober.bisect(lo, hi, tol, target)?;
    Ok(LambdaSearch {
        estimate: CriticalEstimate {
            parameter: Parameter::Lambda,
            estimate: 0.5 * (lo + hi),
            low: lo,
            high: hi,
            side: setup.side,
            dim: setup.dim,
            trials: setup.trials,
            target,
            r: setup.r,
            companion_lambda: None,
        },
        probes: prober.log,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuOptions {
    /// First upper probe; doubled until the crossing probability reaches the target.
    pub mu_start: f64,
    pub mu_max: f64,
}

impl Default for MuOptions {
    fn default() -> Self {
        MuOptions { mu_start: 1.0, mu_max: 1e6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MuOutcome {
    Finite(CriticalEstimate),
    /// Crossing probability stays below the target up to `mu_max`.
    NoPercolation {
        mu_max: f64,
        /// Crossing frequency of `G(P_λ, 2r)` on the same trials, an upper
        /// bound for the AB crossing frequency at every `μ`.
        one_type_probability: f64,
        /// Largest `μ` actually simulated.
        mu_probed: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct MuSearch {
    pub lambda: f64,
    pub outcome: MuOutcome,
    pub one_type: ProbeRecord,
    pub probes: Vec<ProbeRecord>,
}

impl MuSearch {
    pub fn estimate(&self) -> Option<&CriticalEstimate> {
        match &self.outcome {
            MuOutcome::Finite(e) => Some(e),
            MuOutcome::NoPercolation { .. } => None,
        }
    }
}

/// Bisects on `μ` for the AB graph `G(P_λ, Q_μ, r)` at fixed `λ`.
///
/// An AB crossing needs every hop `x–y–x'` to have `|x - x'| ≤ 2r`, so a
/// trial whose A points do not cross in `G(P_λ, 2r)` fails at every `μ`.
/// When fewer than half of the trials cross in the one-type graph, no `μ`
/// (including `mu_max`) can reach the target and the search stops there.
pub fn estimate_mu_c(setup: &BoxSetup, lambda: f64, tol: f64, options: &MuOptions) -> Result<MuSearch> {
    setup.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(format!("lambda must be positive, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    if !(options.mu_start > 0.0 && options.mu_start <= options.mu_max) {
        return Err(Error::param(format!(
            "need 0 < mu_start <= mu_max, got {} and {}",
            options.mu_start, options.mu_max
        )));
    }
    let target = 0.5;

    let a_patterns: Vec<PointPattern> =
        (0..setup.trials).into_par_iter().map(|trial| setup.sample(trial, Stream::A, lambda)).collect::<Result<_>>()?;
    let ceiling: Vec<bool> = a_patterns.par_iter().map(|x| one_type_crosses(x, setup.r)).collect::<Result<_>>()?;
    let ceiling_hits = ceiling.iter().filter(|&&c| c).count() as u64;
    let one_type = ProbeRecord::new(lambda, ceiling_hits, setup.trials);

    let mut prober = Prober::new(setup.trials, |trial, mu| {
        if !ceiling[trial as usize] {
            return Ok(false);
        }
        let y = setup.sample(trial, Stream::B, mu)?;
        ab_crosses(&a_patterns[trial as usize], &y, setup.r)
    });

    if one_type.probability < target {
        return Ok(MuSearch {
            lambda,
            outcome: MuOutcome::NoPercolation {
                mu_max: options.mu_max,
                one_type_probability: one_type.probability,
                mu_probed: 0.0,
            },
            one_type,
            probes: prober.log,
        });
    }

    // μ = 0 has no edges, and L >= 4r keeps a lone vertex off one face.
    let mut lo = 0.0;
    let mut hi = options.mu_start;
    loop {
        if prober.probe(hi)? >= target {
            break;
        }
        if hi >= options.mu_max {
            return Ok(MuSearch {
                lambda,
                outcome: MuOutcome::NoPercolation {
                    mu_max: options.mu_max,
                    one_type_probability: one_type.probability,
                    mu_probed: hi,
                },
                one_type,
                probes: prober.log,
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(options.mu_max);
    }
    let (lo, hi) = prober.bisect(lo, hi, tol, target)?;
    Ok(MuSearch {
        lambda,
        outcome: MuOutcome::Finite(CriticalEstimate {
            parameter: Parameter::Mu,
            estimate: 0.5 * (lo + hi),
            low: lo,
            high: hi,
            side: setup.side,
            dim: setup.dim,
            trials: setup.trials,
            target,
            r: setup.r,
            companion_lambda: Some(lambda),
        }),
        one_type,
        probes: prober.log,
    })
}
