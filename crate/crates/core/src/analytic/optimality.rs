use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sharded;
use crate::error::{invalid, Result, SaaError};
use crate::harness::{binomial_se, bound_tail_pinelis};

/// `min (α/2)‖u‖² - E⟨h(ξ), u⟩` with `h(ξ) = ξ₁φ₁ + ξ₂φ₂`, `ξ` standard
/// Gaussian, simulated in the coefficient space of the orthonormal pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityExampleSpec {
    pub alpha: f64,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
}

/// `‖u* - u_N*‖ = √(ξ̄₁² + ξ̄₂²) / α` for each replication (`u* = 0`).
pub fn optimality_example_errors(spec: &OptimalityExampleSpec) -> Result<Vec<f64>> {
    if !(spec.alpha > 0.0) || spec.n == 0 || spec.replications == 0 {
        return Err(invalid("optimality example needs alpha > 0, N >= 1 and R >= 1"));
    }
    let n = spec.n;
    let alpha = spec.alpha;
    let shards = sharded(spec.replications, spec.seed, |rng, count| {
        (0..count)
            .map(|_| {
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..n {
                    s1 += rng.sample::<f64, _>(StandardNormal);
                    s2 += rng.sample::<f64, _>(StandardNormal);
                }
                let (m1, m2) = (s1 / n as f64, s2 / n as f64);
                m1.hypot(m2) / alpha
            })
            .collect::<Vec<f64>>()
    });
    Ok(shards.into_iter().flatten().collect())
}

/// `P(‖u* - u_N*‖ ≥ ε) = exp(-N α² ε² / 2)`.
pub fn optimality_exact_tail(alpha: f64, n: usize, eps: f64) -> f64 {
    (-(n as f64) * alpha * alpha * eps * eps / 2.0).exp()
}

/// `E exp(‖h(ξ)‖² / τ²) = (1 - 2/τ²)⁻¹`, the χ²₂ moment generating function at `1/τ²`.
pub fn chi2_exp_moment(tau_sq: f64) -> Result<f64> {
    if !(tau_sq > 2.0) {
        return Err(SaaError::InvalidArgument(format!(
            "E exp(chi2_2 / tau^2) diverges for tau^2 = {tau_sq} <= 2"
        )));
    }
    Ok(1.0 / (1.0 - 2.0 / tau_sq))
}

/// `τ² = 2e/(e - 1)`, for which the exponential moment equals `e`.
pub fn optimality_tau_sq() -> f64 {
    let e = std::f64::consts::E;
    2.0 * e / (e - 1.0)
}

/// `3τ²/2` with `τ² = 2e/(e - 1)`.
pub fn optimality_gap_constant() -> f64 {
    1.5 * optimality_tau_sq()
}

/// Ratio of the exact tail exponent `α²/2` to the bound exponent `α²/(3τ²)`.
pub fn tail_exponent_ratio(alpha: f64) -> f64 {
    let exact = alpha * alpha / 2.0;
    let bound = alpha * alpha / (3.0 * optimality_tau_sq());
    exact / bound
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityTailRow {
    pub n: usize,
    pub epsilon: f64,
    pub empirical: f64,
    pub exact: f64,
    pub pinelis: f64,
    pub binomial_se: f64,
}

impl OptimalityTailRow {
    pub fn matches_exact(&self) -> bool {
        (self.empirical - self.exact).abs() <= 3.0 * self.binomial_se
    }

    pub fn bound_dominates(&self) -> bool {
        self.pinelis >= self.exact
    }
}

/// Empirical against exact tail at `ε = m/(α√N)` for each multiplier `m`.
/// The standard error uses the exact tail probability.
pub fn optimality_tail_table(
    alpha: f64,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
    multipliers: &[f64],
) -> Result<(Vec<OptimalityTailRow>, Vec<Vec<f64>>)> {
    let tau = optimality_tau_sq().sqrt();
    let mut rows = Vec::new();
    let mut all_errors = Vec::new();
    for (i, &n) in n_grid.iter().enumerate() {
        let spec = OptimalityExampleSpec {
            alpha,
            n,
            replications,
            seed: crate::stochastic::derive_seed(seed, &[i as u64, n as u64]),
        };
        let errors = optimality_example_errors(&spec)?;
        for &m in multipliers {
            let eps = m / (alpha * (n as f64).sqrt());
            let exact = optimality_exact_tail(alpha, n, eps);
            let empirical = errors.iter().filter(|&&e| e >= eps).count() as f64 / replications as f64;
            rows.push(OptimalityTailRow {
                n,
                epsilon: eps,
                empirical,
                exact,
                pinelis: bound_tail_pinelis(alpha, tau, n, eps),
                binomial_se: binomial_se(exact, replications),
            });
        }
        all_errors.push(errors);
    }
    Ok((rows, all_errors))
}
