use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sharded;
use crate::error::{invalid, Result};
use crate::harness::{bound_hilbert_sum, HilbertTailVariant};

/// `σ² = 2s²/(1 - e⁻²)`, for which `E exp(X²/σ²) = e` when `X ~ N(0, s²)`.
pub fn exp_moment_sigma_sq(s: f64) -> f64 {
    2.0 * s * s / (1.0 - (-2.0f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentRow {
    pub lambda: f64,
    /// Monte Carlo `E[exp(λ|X|) - λ|X|]`.
    pub lhs: f64,
    pub standard_error: f64,
    /// `exp(3λ²σ²/4)`
    pub rhs: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentReport {
    pub s: f64,
    pub sigma_sq: f64,
    pub trials: usize,
    pub rows: Vec<ExpMomentRow>,
}

impl ExpMomentReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated).count()
    }
}

/// `E[exp(λ|X|) - λ|X|] ≤ exp(3λ²σ²/4)` for Gaussian `X ~ N(0, s²)`; a row
/// is violated when the estimate exceeds the right side by more than 3 SE.
pub fn check_exp_moment_inequality(s: f64, lambda_grid: &[f64], trials: usize, seed: u64) -> Result<ExpMomentReport> {
    if !(s > 0.0) || trials < 2 {
        return Err(invalid("need s > 0 and at least two trials"));
    }
    if lambda_grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(invalid("lambda grid must be nonnegative"));
    }
    let sigma_sq = exp_moment_sigma_sq(s);
    let k = lambda_grid.len();
    let shards = sharded(trials, seed, |rng, count| {
        let mut sums = vec![(0.0, 0.0); k];
        for _ in 0..count {
            let x: f64 = s * rng.sample::<f64, _>(StandardNormal);
            for (acc, &l) in sums.iter_mut().zip(lambda_grid) {
                let v = (l * x.abs()).exp() - l * x.abs();
                acc.0 += v;
                acc.1 += v * v;
            }
        }
        sums
    });
    let rows = lambda_grid
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let (sum, sum_sq) = shards.iter().fold((0.0, 0.0), |a, s| (a.0 + s[j].0, a.1 + s[j].1));
            let m = trials as f64;
            let mean = sum / m;
            let var = ((sum_sq / m - mean * mean) * m / (m - 1.0)).max(0.0);
            let se = (var / m).sqrt();
            let rhs = (0.75 * lambda * lambda * sigma_sq).exp();
            ExpMomentRow {
                lambda,
                lhs: mean,
                standard_error: se,
                rhs,
                violated: mean > rhs + 3.0 * se,
            }
        })
        .collect();
    Ok(ExpMomentReport {
        s,
        sigma_sq,
        trials,
        rows,
    })
}

/// Multipliers `t` of the grid `ε = t √(dim/N)`.
pub const HILBERT_EPS_MULTIPLIERS: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertTailRow {
    pub epsilon: f64,
    /// Estimate of `P(‖Z₁ + … + Z_N‖ ≥ N ε)`.
    pub empirical: f64,
    /// `P(χ²_dim ≥ N ε²)`.
    pub exact: f64,
    pub bound: f64,
    pub binomial_se: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertTailReport {
    pub dim: usize,
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<HilbertTailRow>,
}

impl HilbertTailReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated).count()
    }
}

/// Sums of `N` standard Gaussian vectors in `R^dim` (`σ² = dim`) against
/// `2 exp(-ε² N / (3 dim))`; a row is violated when the empirical frequency
/// exceeds the bound by more than 3 binomial SE.
pub fn check_hilbert_sum_tail(dim: usize, n: usize, trials: usize, seed: u64) -> Result<HilbertTailReport> {
    if dim == 0 || n == 0 || trials == 0 {
        return Err(invalid("need dim, N and trials positive"));
    }
    let norms: Vec<f64> = sharded(trials, seed, |rng, count| {
        let mut sum = vec![0.0; dim];
        (0..count)
            .map(|_| {
                sum.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..n {
                    for v in sum.iter_mut() {
                        *v += rng.sample::<f64, _>(StandardNormal);
                    }
                }
                sum.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let chi2 = ChiSquared::new(dim as f64).map_err(|e| invalid(e.to_string()))?;
    let scale = (dim as f64 / n as f64).sqrt();
    let rows = HILBERT_EPS_MULTIPLIERS
        .iter()
        .map(|&t| {
            let eps = t * scale;
            let level = n as f64 * eps;
            let p = norms.iter().filter(|&&v| v >= level).count() as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            let bound = bound_hilbert_sum((dim as f64).sqrt(), n, eps, HilbertTailVariant::Cosh);
            HilbertTailRow {
                epsilon: eps,
                empirical: p,
                exact: chi2.sf(n as f64 * eps * eps),
                bound,
                binomial_se: se,
                violated: p > bound + 3.0 * se,
            }
        })
        .collect();
    Ok(HilbertTailReport { dim, n, trials, rows })
}
