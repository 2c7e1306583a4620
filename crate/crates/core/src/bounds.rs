//! Explicit upper bounds on the critical B-intensity `μ_c(r, λ)`.
//!
//! With `δ = λ - λ_c` and a split parameter `α ∈ (0, 1)`, the pipeline is
//!
//! ```text
//! s  = r (1 + αδ/λ_c)^(-1/d)          so that λ_c (r/s)^d = λ_c + αδ
//! ε  = (r - s) / (2 √d)
//! t  = (r + s) / 2
//! p_a = 1 - exp(-ε^d a),   ν = λ_c + αδ
//! Δ  = #{u ∈ εZ^d : 0 < |u| ≤ t}
//! μ_exact   = ε^-d  Δ            log 1/(1 - (p_ν/p_λ)^(1/Δ))
//! μ_relaxed = ε^-2d π_d r^d      log 1/(1 - (p_ν/p_λ)^((ε/r)^d/π_d))
//! ```
//!
//! and the bound is the minimum of `μ_relaxed` over a grid of `α`.
//! Near `δ → 0` the ratio `p_ν/p_λ` is within ~1e-10 of one, so every step
//! is written in terms of `expm1`/`ln_1p`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Per-axis guard on `⌈t/ε⌉` for lattice-ball enumeration.
pub const MAX_LATTICE_EXTENT: f64 = 1e4;

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_scale(r: f64, delta: f64, lambda_c: f64, d: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("r must be positive, got {r}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("delta must be positive, got {delta}")));
    }
    if !(lambda_c > 0.0 && lambda_c.is_finite()) {
        return Err(Error::param(format!("lambda_c must be positive, got {lambda_c}")));
    }
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    Ok(())
}

/// `r (1 + αδ/λ_c)^(-1/d)`.
pub fn s_of_alpha(r: f64, delta: f64, lambda_c: f64, alpha: f64, d: usize) -> Result<f64> {
    check_scale(r, delta, lambda_c, d)?;
    check_alpha(alpha)?;
    Ok(r * (-(alpha * delta / lambda_c).ln_1p() / d as f64).exp())
}

/// `(r - s)/(2√d)`, the largest cube side whose diameter is at most `t - s`.
pub fn epsilon_of_alpha(r: f64, delta: f64, lambda_c: f64, alpha: f64, d: usize) -> Result<f64> {
    check_scale(r, delta, lambda_c, d)?;
    check_alpha(alpha)?;
    // r - s = -r·expm1(-log1p(αδ/λ_c)/d), free of cancellation
    let gap = -r * (-(alpha * delta / lambda_c).ln_1p() / d as f64).exp_m1();
    Ok(gap / (2.0 * (d as f64).sqrt()))
}

/// Probability that a cube of side `epsilon` holds a point of intensity `a`.
pub fn p_occupy(a: f64, epsilon: f64, d: usize) -> f64 {
    -(-epsilon.powi(d as i32) * a).exp_m1()
}

/// Number of nonzero points of `εZ^d` with Euclidean norm at most `t`.
pub fn delta_count(t: f64, epsilon: f64, d: usize) -> Result<u64> {
    if !(t > 0.0 && t.is_finite()) || !(epsilon > 0.0 && epsilon.is_finite()) || d == 0 {
        return Err(Error::param(format!("need t > 0, epsilon > 0, d >= 1; got t={t}, epsilon={epsilon}, d={d}")));
    }
    let extent = (t / epsilon).ceil();
    if extent > MAX_LATTICE_EXTENT {
        return Err(Error::Resource(format!("lattice ball extent {extent} exceeds {MAX_LATTICE_EXTENT} per axis")));
    }
    let k_max = extent as i64;
    Ok(count_ball(d, 0.0, t * t, epsilon, k_max) - 1)
}

fn count_ball(dims_left: usize, partial: f64, t2: f64, eps: f64, k_max: i64) -> u64 {
    let fits = |k: i64| {
        let c = eps * k as f64;
        partial + c * c <= t2
    };
    if dims_left == 1 {
        if !fits(0) {
            return 0;
        }
        let mut k = (((t2 - partial).max(0.0)).sqrt() / eps).floor() as i64;
        k = k.min(k_max);
        while k > 0 && !fits(k) {
            k -= 1;
        }
        while k < k_max && fits(k + 1) {
            k += 1;
        }
        return 2 * k as u64 + 1;
    }
    (-k_max..=k_max)
        .filter(|&k| fits(k))
        .map(|k| {
            let c = eps * k as f64;
            count_ball(dims_left - 1, partial + c * c, t2, eps, k_max)
        })
        .sum()
}

/// `q = 1 - (1 - (p_ν/p_λ)^(1/Δ))^Δ`, the occupation probability of the
/// coupled B-field.
pub fn q_coupling(p_nu: f64, p_lambda: f64, delta: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_nu) || !(0.0..=1.0).contains(&p_lambda) {
        return Err(Error::param(format!("probabilities must lie in [0, 1]: {p_nu}, {p_lambda}")));
    }
    if p_nu > p_lambda {
        return Err(Error::param(format!("need p_nu <= p_lambda, got {p_nu} > {p_lambda}")));
    }
    if delta == 0 {
        return Err(Error::param("Delta must be at least 1"));
    }
    if p_nu == p_lambda {
        return Ok(1.0);
    }
    let dl = delta as f64;
    let ln_ratio = (p_nu / p_lambda).ln();
    let one_minus_u = -(ln_ratio / dl).exp_m1();
    Ok(-(dl * one_minus_u.ln()).exp_m1())
}

/// `ln(p_ν/p_λ)` for `p_a = 1 - exp(-x_a)`, given `x_ν - x_λ` directly.
fn ln_p_ratio(x_nu: f64, x_lambda: f64, x_diff: f64) -> f64 {
    // p_ν - p_λ = exp(-x_ν)·expm1(x_ν - x_λ)
    let p_lambda = -(-x_lambda).exp_m1();
    let diff = (-x_nu).exp() * x_diff.exp_m1();
    (diff / p_lambda).ln_1p()
}

/// `log 1/(1 - exp(power·ln_ratio))`.
fn neg_ln_one_minus(ln_ratio: f64, power: f64) -> f64 {
    -(-(power * ln_ratio).exp_m1()).ln()
}

/// Model parameters for the bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub dim: usize,
    pub r: f64,
    pub lambda: f64,
    pub lambda_c: f64,
    pub alphas: Vec<f64>,
}

impl BoundInputs {
    pub fn new(dim: usize, r: f64, lambda: f64, lambda_c: f64) -> Self {
        BoundInputs { dim, r, lambda, lambda_c, alphas: default_alpha_grid(64) }
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Self {
        self.alphas = alphas;
        self
    }

    /// `δ = λ - λ_c`.
    pub fn delta(&self) -> f64 {
        self.lambda - self.lambda_c
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::param(format!("bounds need d >= 2, got {}", self.dim)));
        }
        if !(self.lambda > self.lambda_c) {
            return Err(Error::param(format!("need lambda > lambda_c, got {} <= {}", self.lambda, self.lambda_c)));
        }
        check_scale(self.r, self.delta(), self.lambda_c, self.dim)?;
        if self.alphas.is_empty() {
            return Err(Error::param("alpha grid is empty"));
        }
        self.alphas.iter().try_for_each(|&a| check_alpha(a))
    }
}

/// `count` log-spaced points from 0.01 to 0.99 inclusive.
pub fn default_alpha_grid(count: usize) -> Vec<f64> {
    let (lo, hi) = (0.01f64.ln(), 0.99f64.ln());
    match count {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect(),
    }
}

/// All intermediate quantities at one `α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub alpha: f64,
    pub s: f64,
    pub t: f64,
    pub epsilon: f64,
    /// `None` when the lattice ball is too large to enumerate.
    pub delta_count: Option<u64>,
    pub p_nu: f64,
    pub p_lambda: f64,
    /// `(p_ν/p_λ)^((ε/r)^d/π_d)`.
    pub ratio_power: f64,
    pub mu_relaxed: f64,
    pub mu_exact_delta: Option<f64>,
}

pub fn bound_row(inputs: &BoundInputs, alpha: f64) -> Result<BoundRow> {
    inputs.validate()?;
    check_alpha(alpha)?;
    let d = inputs.dim;
    let (r, lc, delta) = (inputs.r, inputs.lambda_c, inputs.delta());
    let s = s_of_alpha(r, delta, lc, alpha, d)?;
    let epsilon = epsilon_of_alpha(r, delta, lc, alpha, d)?;
    let t = (r + s) / 2.0;
    let eps_d = epsilon.powi(d as i32);
    let nu = lc + alpha * delta;
    let ln_ratio = ln_p_ratio(eps_d * nu, eps_d * inputs.lambda, -eps_d * (1.0 - alpha) * delta);

    let ball = unit_ball_volume(d);
    let power = (epsilon / r).powi(d as i32) / ball;
    let mu_relaxed = ball * r.powi(d as i32) / (eps_d * eps_d) * neg_ln_one_minus(ln_ratio, power);

    let delta_count = match delta_count(t, epsilon, d) {
        Ok(n) => Some(n),
        Err(Error::Resource(_)) => None,
        Err(e) => return Err(e),
    };
    let mu_exact_delta = delta_count.map(|n| n as f64 / eps_d * neg_ln_one_minus(ln_ratio, 1.0 / n as f64));

    Ok(BoundRow {
        alpha,
        s,
        t,
        epsilon,
        delta_count,
        p_nu: p_occupy(nu, epsilon, d),
        p_lambda: p_occupy(inputs.lambda, epsilon, d),
        ratio_power: (power * ln_ratio).exp(),
        mu_relaxed,
        mu_exact_delta,
    })
}

/// `ε^-d Δ log 1/(1 - (p_ν/p_λ)^(1/Δ))` at one `α`.
pub fn mu_bound_exact_delta(inputs: &BoundInputs, alpha: f64) -> Result<f64> {
    let row = bound_row(inputs, alpha)?;
    row.mu_exact_delta
        .ok_or_else(|| Error::Resource(format!("lattice ball for t={}, epsilon={} is too large", row.t, row.epsilon)))
}

/// `ε^-2d π_d r^d log 1/(1 - (p_ν/p_λ)^((ε/r)^d/π_d))` at one `α`.
pub fn mu_bound_relaxed(inputs: &BoundInputs, alpha: f64) -> Result<f64> {
    Ok(bound_row(inputs, alpha)?.mu_relaxed)
}

/// `(4 λ_c²/r)^d d^(3d) (d+1) π_d`, the limiting value of
/// `μ_c(r, λ_c + δ) δ^(2d)/|log δ|` bound as `δ → 0`.
pub fn asymptotic_constant(r: f64, lambda_c: f64, d: usize) -> f64 {
    let df = d as f64;
    (4.0 * lambda_c * lambda_c / r).powi(d as i32) * df.powf(3.0 * df) * (df + 1.0) * unit_ball_volume(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub delta: f64,
    pub rows: Vec<BoundRow>,
    pub alpha_opt: f64,
    /// Minimum of `mu_relaxed` over the grid.
    pub mu_hat: f64,
    pub alpha_opt_exact: Option<f64>,
    /// Minimum of `mu_exact_delta` over rows where it is available.
    pub mu_hat_exact: Option<f64>,
    pub asymptotic_constant: f64,
}

impl BoundReport {
    /// `μ̂ δ^(2d) / |log δ|`.
    pub fn normalized(&self) -> f64 {
        self.mu_hat * self.delta.powi(2 * self.inputs.dim as i32) / self.delta.ln().abs()
    }
}

/// Evaluates every grid `α` and keeps the smallest bound.
pub fn mu_bound_optimized(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let rows: Vec<BoundRow> = inputs.alphas.iter().map(|&a| bound_row(inputs, a)).collect::<Result<_>>()?;
    let best = rows.iter().min_by(|a, b| a.mu_relaxed.total_cmp(&b.mu_relaxed)).expect("grid is nonempty");
    let best_exact =
        rows.iter().filter_map(|row| row.mu_exact_delta.map(|m| (row.alpha, m))).min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(BoundReport {
        inputs: inputs.clone(),
        delta: inputs.delta(),
        alpha_opt: best.alpha,
        mu_hat: best.mu_relaxed,
        alpha_opt_exact: best_exact.map(|b| b.0),
        mu_hat_exact: best_exact.map(|b| b.1),
        asymptotic_constant: asymptotic_constant(inputs.r, inputs.lambda_c, inputs.dim),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LC: f64 = 0.3591;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert_eq!(unit_ball_volume(1), 2.0);
    }

    #[test]
    fn s_example_and_scaling_identity() {
        let s = s_of_alpha(1.0, LC, LC, 0.5, 2).unwrap();
        assert!((s - 1.5f64.powf(-0.5)).abs() < 1e-15);
        assert!((s - 0.8165).abs() < 1e-4);
        for &alpha in &[0.01, 0.3, 0.77, 0.99] {
            for &delta in &[1e-4, 1e-2, 1.0] {
                for d in 2..=4 {
                    let s = s_of_alpha(2.0, delta, LC, alpha, d).unwrap();
                    let lhs = LC * (2.0 / s).powi(d as i32);
                    let rhs = LC + alpha * delta;
                    assert!(((lhs - rhs) / rhs).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn s_and_epsilon_limits() {
        let s = s_of_alpha(1.0, 0.1, LC, 1e-12, 2).unwrap();
        assert!((1.0 - s) < 1e-12);
        assert!(epsilon_of_alpha(1.0, 0.1, LC, 1e-12, 2).unwrap() < 1e-12);
        assert!(s_of_alpha(1.0, 0.1, LC, 1.0, 2).is_err());
        assert!(s_of_alpha(1.0, -0.1, LC, 0.5, 2).is_err());
    }

    #[test]
    fn epsilon_example() {
        let eps = epsilon_of_alpha(1.0, LC, LC, 0.5, 2).unwrap();
        let direct = (1.0 - 1.5f64.powf(-0.5)) / (2.0 * 2f64.sqrt());
        assert!((eps - direct).abs() < 1e-15);
        assert!((eps - 0.06487).abs() < 1e-5);
    }

    #[test]
    fn epsilon_small_delta_asymptote() {
        for d in 2..=3 {
            let (r, alpha, delta) = (1.3, 0.6, 1e-6);
            let eps = epsilon_of_alpha(r, delta, LC, alpha, d).unwrap();
            let asym = alpha * r * delta / (2.0 * (d as f64).powf(1.5) * LC);
            assert!((eps / asym - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn occupation_probability() {
        assert_eq!(p_occupy(0.0, 0.3, 2), 0.0);
        let eps = 2f64.ln().sqrt();
        assert!((p_occupy(1.0, eps, 2) - 0.5).abs() < 1e-15);
        assert!(p_occupy(0.3, 0.1, 2) < p_occupy(0.4, 0.1, 2));
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(delta_count(1.0, 1.0, 2).unwrap(), 4);
        assert_eq!(delta_count(1.5, 1.0, 2).unwrap(), 8);
        assert_eq!(delta_count(1.0, 1.0, 3).unwrap(), 6);
        assert_eq!(delta_count(0.5, 1.0, 2).unwrap(), 0);
        assert!(matches!(delta_count(1.0, 1e-5, 2), Err(Error::Resource(_))));
    }

    fn brute_count(t: f64, eps: f64, k: i64) -> u64 {
        let mut n = 0;
        for a in -k..=k {
            for b in -k..=k {
                let (x, y) = (eps * a as f64, eps * b as f64);
                if (a, b) != (0, 0) && x * x + y * y <= t * t {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn lattice_counts_match_enumeration() {
        for &(t, eps) in &[(0.9f64, 0.07f64), (2.5, 0.3), (1.0, 0.1), (3.0, 1.0), (0.908, 0.0649)] {
            let k = (t / eps).ceil() as i64 + 1;
            assert_eq!(delta_count(t, eps, 2).unwrap(), brute_count(t, eps, k), "t={t} eps={eps}");
        }
    }

    #[test]
    fn q_cases() {
        assert_eq!(q_coupling(0.3, 0.3, 7).unwrap(), 1.0);
        assert_eq!(q_coupling(0.0, 0.3, 7).unwrap(), 0.0);
        assert!((q_coupling(0.1, 0.4, 1).unwrap() - 0.25).abs() < 1e-15);
        let q = q_coupling(0.2, 0.5, 6).unwrap();
        let direct = 1.0 - (1.0 - 0.4f64.powf(1.0 / 6.0)).powi(6);
        assert!((q - direct).abs() < 1e-14);
        assert!(q < 1.0);
        assert!(q_coupling(0.5, 0.2, 3).is_err());
        assert!(q_coupling(0.1, 0.2, 0).is_err());
    }

    #[test]
    fn mu_bounds_positive_and_ordered() {
        let inputs = BoundInputs::new(2, 1.0, 2.0 * LC, LC).with_alphas(default_alpha_grid(16));
        for &a in &inputs.alphas {
            let row = bound_row(&inputs, a).unwrap();
            let exact = row.mu_exact_delta.unwrap();
            assert!(exact > 0.0 && exact.is_finite());
            assert!(row.mu_relaxed.is_finite());
            assert!(exact <= row.mu_relaxed, "alpha={a}: {exact} > {}", row.mu_relaxed);
            let eps_d = row.epsilon.powi(2);
            assert!(eps_d * row.delta_count.unwrap() as f64 <= PI);
        }
    }

    #[test]
    fn exact_delta_regression_pin() {
        let inputs = BoundInputs::new(2, 1.0, 2.0 * LC, LC);
        let mu = mu_bound_exact_delta(&inputs, 0.5).unwrap();
        let row = bound_row(&inputs, 0.5).unwrap();
        assert_eq!(row.delta_count, Some(EXACT_PIN_DELTA));
        assert!((mu / EXACT_PIN_MU - 1.0).abs() < 1e-9, "mu = {mu:.17e}");
    }

    // frozen from the first evaluation at d=2, r=1, λ_c=0.3591, λ=2λ_c, α=0.5
    const EXACT_PIN_DELTA: u64 = 608;
    const EXACT_PIN_MU: f64 = 1.106_112_497_666_702e6;

    #[test]
    fn relaxed_has_interior_minimum() {
        let inputs = BoundInputs::new(2, 1.0, 2.0 * LC, LC);
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&a| mu_bound_relaxed(&inputs, a).unwrap()).collect();
        let (imin, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!(imin > 0 && imin < grid.len() - 1);
        assert!(vals[0] > 10.0 * vals[imin]);
        assert!(vals[grid.len() - 1] > vals[imin]);
    }

    #[test]
    fn optimized_singleton_and_refinement() {
        let base = BoundInputs::new(2, 1.0, 1.5 * LC, LC);
        let single = mu_bound_optimized(&base.clone().with_alphas(vec![0.4])).unwrap();
        assert_eq!(single.mu_hat, mu_bound_relaxed(&base, 0.4).unwrap());
        let coarse = mu_bound_optimized(&base.clone().with_alphas(default_alpha_grid(8))).unwrap();
        let mut fine_grid = default_alpha_grid(8);
        fine_grid.extend(default_alpha_grid(33));
        let fine = mu_bound_optimized(&base.with_alphas(fine_grid)).unwrap();
        assert!(fine.mu_hat <= coarse.mu_hat);
    }

    #[test]
    fn asymptotic_constant_value() {
        let c = asymptotic_constant(1.0, LC, 2);
        let direct = (4.0 * LC * LC).powi(2) * 64.0 * 3.0 * PI;
        assert!((c - direct).abs() < 1e-12 * direct);
        assert!((c / 160.0 - 1.0).abs() < 0.01);
        assert!(asymptotic_constant(1.0, 0.4, 2) > c);
    }

    #[test]
    fn input_validation() {
        assert!(mu_bound_optimized(&BoundInputs::new(2, 1.0, 0.3, LC)).is_err());
        assert!(mu_bound_optimized(&BoundInputs::new(1, 1.0, 1.0, LC)).is_err());
        assert!(mu_bound_optimized(&BoundInputs::new(2, 1.0, 1.0, LC).with_alphas(vec![])).is_err());
        assert!(mu_bound_optimized(&BoundInputs::new(2, 1.0, 1.0, LC).with_alphas(vec![1.0])).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_alpha_grid(64);
        assert_eq!(g.len(), 64);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[63] - 0.99).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
