use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stochastic::{draw, rng_from_seed, ParamDistribution};

/// `‖y_d‖_{L²(0,1)}` for `y_d = sin(πx)/π²`.
pub fn lognormal_yd_norm() -> f64 {
    1.0 / (PI * PI * 2f64.sqrt())
}

fn denominator(alpha: f64) -> f64 {
    E * E + PI.powi(4) * alpha
}

/// `c*` in `u* = c* y_d`, `c* = -π² e^{1/2} / (e² + π⁴α)`.
pub fn lognormal_optimal_coefficient(alpha: f64) -> f64 {
    -PI * PI * E.sqrt() / denominator(alpha)
}

/// Residual of `α u* + E[e^{2ξ}] K̄*K̄ u* - E[e^ξ] K̄*y_d` along `y_d`, where
/// `K̄ = -Ā⁻¹` acts as `-1/π²` on `y_d`.
pub fn lognormal_normal_equation_residual(alpha: f64) -> f64 {
    let c = lognormal_optimal_coefficient(alpha);
    alpha * c + E * E * c / PI.powi(4) + E.sqrt() / (PI * PI)
}

/// `ln(2(e² + π⁴α)) - 1/2`; above it `‖∇G₁(u*, ξ)‖ ≥ e^ξ ‖y_d‖ / π²`.
pub fn lognormal_threshold(alpha: f64) -> f64 {
    (2.0 * denominator(alpha)).ln() - 0.5
}

/// Coefficient of `∇_u G₁(u*, ξ)` along `y_d`.
fn gradient_coefficient(alpha: f64, xi: f64) -> f64 {
    xi.exp() / (PI * PI) - (0.5 + 2.0 * xi).exp() / (PI * PI * denominator(alpha))
}

/// `‖∇_u G₁(u*, ξ)‖_{L²(0,1)}`.
pub fn lognormal_gradient_norm(alpha: f64, xi: f64) -> f64 {
    gradient_coefficient(alpha, xi).abs() * lognormal_yd_norm()
}

/// `‖∇_u G₁(u*, ξ) - ∇F₁(u*)‖` with `E e^ξ = e^{1/2}` and `E e^{2ξ} = e²`.
pub fn lognormal_deviation(alpha: f64, xi: f64) -> f64 {
    let mean = E.sqrt() / (PI * PI) - (0.5 + 2.0f64).exp() / (PI * PI * denominator(alpha));
    (gradient_coefficient(alpha, xi) - mean).abs() * lognormal_yd_norm()
}

/// Number of points of an equispaced grid on `[ξ*, ξ* + width]` where the
/// threshold inequality fails.
pub fn lognormal_threshold_violations(alpha: f64, points: usize, width: f64) -> usize {
    let start = lognormal_threshold(alpha);
    (0..points)
        .map(|i| start + width * i as f64 / (points.max(2) - 1) as f64)
        .filter(|&xi| lognormal_gradient_norm(alpha, xi) < xi.exp() / (PI * PI) * lognormal_yd_norm())
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LognormalDemoSpec {
    pub alpha: f64,
    pub tau_grid: Vec<f64>,
    /// Increasing sample counts at which the running estimate is reported.
    pub sample_counts: Vec<usize>,
    pub seed: u64,
    /// Bounded law of `ξ` for the contrast case.
    pub contrast: ParamDistribution,
}

impl Default for LognormalDemoSpec {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            tau_grid: vec![10.0],
            sample_counts: vec![1_000, 10_000, 100_000, 1_000_000],
            seed: 61,
            contrast: ParamDistribution::TruncatedNormal {
                lo: -3.0,
                hi: 3.0,
                mean: 0.0,
                sd: 1.0,
            },
        }
    }
}

/// Running estimates of `E exp(d(ξ)²/τ²)` at the requested sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentSeries {
    pub law: String,
    pub tau: f64,
    pub counts: Vec<usize>,
    pub estimates: Vec<f64>,
    pub exceeds_e: bool,
    /// The last estimate is above the one two decades earlier.
    pub growing: bool,
    /// Strictly increasing across every reported count.
    pub monotone: bool,
    /// Relative change over the last decade at most [`STABLE_REL_CHANGE`].
    pub stabilized: bool,
}

/// Relative change below which a running estimate counts as stabilized.
pub const STABLE_REL_CHANGE: f64 = 1e-4;

impl ExpMomentSeries {
    fn new(law: &str, tau: f64, counts: &[usize], estimates: Vec<f64>) -> Self {
        let last = *estimates.last().unwrap_or(&f64::NAN);
        let earlier = counts
            .iter()
            .rposition(|&c| c * 100 <= *counts.last().unwrap_or(&0))
            .map(|i| estimates[i]);
        let previous = estimates.len().checked_sub(2).map(|i| estimates[i]);
        Self {
            law: law.to_string(),
            tau,
            counts: counts.to_vec(),
            exceeds_e: estimates.iter().any(|&v| v > E),
            growing: earlier.is_some_and(|v| last > v),
            monotone: estimates.windows(2).all(|w| w[1] > w[0]),
            stabilized: last.is_finite()
                && previous.is_some_and(|p| ((last - p) / last).abs() <= STABLE_REL_CHANGE),
            estimates,
        }
    }
}

/// Divergence evidence is operational: an infinite expectation cannot be
/// certified by sampling, so the report records growth of the running
/// estimates across sample-count decades and whether they pass `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LognormalReport {
    pub alpha: f64,
    pub optimal_coefficient: f64,
    pub normal_equation_residual: f64,
    pub threshold: f64,
    pub yd_norm: f64,
    pub series: Vec<ExpMomentSeries>,
}

fn running_estimates(values: impl Iterator<Item = f64>, counts: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(counts.len());
    let mut sum = 0.0;
    let mut next = counts.iter().peekable();
    for (i, v) in values.enumerate() {
        sum += v;
        while next.peek().is_some_and(|&&c| c == i + 1) {
            out.push(sum / (i + 1) as f64);
            next.next();
        }
    }
    out
}

pub fn lognormal_violation_evidence(spec: &LognormalDemoSpec) -> Result<LognormalReport> {
    if !(spec.alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    if spec.tau_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(invalid("tau grid must be finite and positive"));
    }
    if spec.sample_counts.is_empty() || spec.sample_counts.windows(2).any(|w| w[0] >= w[1]) || spec.sample_counts[0] == 0 {
        return Err(invalid("sample counts must be positive and strictly increasing"));
    }
    if spec.contrast.dim() != 1 {
        return Err(invalid("contrast law must be one-dimensional"));
    }
    let m = *spec.sample_counts.last().unwrap_or(&0);
    let mut rng = rng_from_seed(spec.seed);
    let gaussian: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let contrast = draw(&spec.contrast, m, crate::stochastic::derive_seed(spec.seed, &[1]))?;
    let mut series = Vec::new();
    for &tau in &spec.tau_grid {
        let moment = |xi: f64| (lognormal_deviation(spec.alpha, xi).powi(2) / (tau * tau)).exp();
        let ln = running_estimates(gaussian.iter().map(|&x| moment(x)), &spec.sample_counts);
        series.push(ExpMomentSeries::new("lognormal", tau, &spec.sample_counts, ln));
        let tn = running_estimates(contrast.iter().map(|x| moment(x[0])), &spec.sample_counts);
        series.push(ExpMomentSeries::new("truncated_normal", tau, &spec.sample_counts, tn));
    }
    Ok(LognormalReport {
        alpha: spec.alpha,
        optimal_coefficient: lognormal_optimal_coefficient(spec.alpha),
        normal_equation_residual: lognormal_normal_equation_residual(spec.alpha),
        threshold: lognormal_threshold(spec.alpha),
        yd_norm: lognormal_yd_norm(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_scalars() {
        assert!((lognormal_yd_norm() - 0.07164489603134454).abs() < 1e-15);
        assert!((lognormal_optimal_coefficient(1e-3) + 2.1735527110022472).abs() < 1e-12);
        assert!((lognormal_threshold(1e-3) - 2.2062439294372522).abs() < 1e-12);
        assert!(lognormal_normal_equation_residual(1e-3).abs() <= 1e-12);
    }

    #[test]
    fn threshold_inequality_on_grid() {
        assert_eq!(lognormal_threshold_violations(1e-3, 100, 5.0), 0);
    }

    #[test]
    fn gradient_at_mean_matches_alpha_u() {
        let alpha = 1e-3;
        // ∇F₁(u*) = -α u* along y_d.
        let mean = E.sqrt() / (PI * PI) - (2.5f64).exp() / (PI * PI * denominator(alpha));
        assert!((mean + alpha * lognormal_optimal_coefficient(alpha)).abs() < 1e-15);
    }

    #[test]
    fn running_estimates_pick_prefixes() {
        let est = running_estimates([1.0, 3.0, 5.0, 7.0].into_iter(), &[1, 2, 4]);
        assert_eq!(est, vec![1.0, 2.0, 4.0]);
    }
}
