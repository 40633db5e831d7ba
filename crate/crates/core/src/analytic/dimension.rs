use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sharded;
use crate::error::{invalid, Result};
use crate::stochastic::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDimRow {
    pub n: usize,
    /// Estimate of `P(‖(1/N) Σ ζⁱ‖² > ε)`.
    pub exceedance: f64,
    /// `n σ² / ε`
    pub threshold: f64,
    /// Empirical mean of `N ‖(1/N) Σ ζⁱ‖² / σ²`, which is `χ²_n` distributed.
    pub chi2_mean: f64,
}

/// `E ‖ζ‖²` for `ζ ~ N(0, σ² I_n)` from `draws` samples.
pub fn gaussian_mean_square_norm(n_dim: usize, sigma_sq: f64, draws: usize, seed: u64) -> Result<f64> {
    if n_dim == 0 || !(sigma_sq > 0.0) || draws == 0 {
        return Err(invalid("need n >= 1, sigma^2 > 0 and at least one draw"));
    }
    let sd = sigma_sq.sqrt();
    let sums = sharded(draws, seed, |rng, count| {
        (0..count)
            .map(|_| (0..n_dim).map(|_| (sd * rng.sample::<f64, _>(StandardNormal)).powi(2)).sum::<f64>())
            .sum::<f64>()
    });
    Ok(sums.iter().sum::<f64>() / draws as f64)
}

/// Monte Carlo `P(‖(1/N) Σ ζⁱ‖² > ε)` for `ζ ~ N(0, σ² I_n)` at each `N`.
/// The sample mean is drawn directly from its law `N(0, σ²/N · I_n)`.
pub fn dimension_demo_finite(
    n_dim: usize,
    sigma_sq: f64,
    eps: f64,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<FiniteDimRow>> {
    if n_dim == 0 || !(sigma_sq > 0.0) || !(eps > 0.0) || trials == 0 || n_grid.contains(&0) {
        return Err(invalid("finite-dimensional demo needs positive parameters"));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let sd = (sigma_sq / n as f64).sqrt();
        let shards = sharded(trials, derive_seed(seed, &[n as u64]), |rng, count| {
            let mut exceed = 0usize;
            let mut chi2 = 0.0;
            for _ in 0..count {
                let sq: f64 = (0..n_dim).map(|_| (sd * rng.sample::<f64, _>(StandardNormal)).powi(2)).sum();
                if sq > eps {
                    exceed += 1;
                }
                chi2 += n as f64 * sq / sigma_sq;
            }
            (exceed, chi2)
        });
        let exceed: usize = shards.iter().map(|s| s.0).sum();
        let chi2: f64 = shards.iter().map(|s| s.1).sum();
        rows.push(FiniteDimRow {
            n,
            exceedance: exceed as f64 / trials as f64,
            threshold: n_dim as f64 * sigma_sq / eps,
            chi2_mean: chi2 / trials as f64,
        });
    }
    Ok(rows)
}

/// `Σ_{k ≤ K} c/k²`.
pub fn basel_second_moment(c: f64, k_trunc: usize) -> f64 {
    (1..=k_trunc).map(|k| c / (k * k) as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfiniteDimReport {
    pub second_moment: f64,
    /// `⌈(3/ε) ln(2/δ) E‖ξ‖²⌉`
    pub required_n: usize,
    /// Fraction of trials with `‖(1/N) Σ ξⁱ‖² ≤ ε` at `N = required_n`.
    pub success_frequency: f64,
    pub trials: usize,
}

/// Sufficient sample size for `ξ` with independent Gaussian coordinates of
/// variance `c/k²`, `k ≤ K`, and a Monte Carlo check of the `ε`-optimality
/// event at that size. The sample mean is drawn from its exact law.
pub fn dimension_demo_infinite(
    k_trunc: usize,
    c: f64,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<InfiniteDimReport> {
    if k_trunc == 0 || !(c > 0.0) || !(eps > 0.0) || trials == 0 {
        return Err(invalid("infinite-dimensional demo needs positive parameters"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    let second_moment = basel_second_moment(c, k_trunc);
    let required_n = (3.0 / eps * (2.0 / delta).ln() * second_moment).ceil() as usize;
    let sds: Vec<f64> = (1..=k_trunc).map(|k| (c / (k * k) as f64 / required_n as f64).sqrt()).collect();
    let hits: usize = sharded(trials, seed, |rng, count| {
        (0..count)
            .filter(|_| sds.iter().map(|sd| (sd * rng.sample::<f64, _>(StandardNormal)).powi(2)).sum::<f64>() <= eps)
            .count()
    })
    .into_iter()
    .sum();
    Ok(InfiniteDimReport {
        second_moment,
        required_n,
        success_frequency: hits as f64 / trials as f64,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basel_limit() {
        let s = basel_second_moment(1.0, 1_000_000);
        assert!((s - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn required_n_depends_only_on_the_sum() {
        let a = dimension_demo_infinite(100, 1.0, 0.5, 0.05, 10, 0).unwrap();
        let b = dimension_demo_infinite(101, 1.0, 0.5, 0.05, 10, 0).unwrap();
        let expected = |s: f64| (3.0 / 0.5 * 40f64.ln() * s).ceil() as usize;
        assert_eq!(a.required_n, expected(a.second_moment));
        assert_eq!(b.required_n, expected(b.second_moment));
    }
}
