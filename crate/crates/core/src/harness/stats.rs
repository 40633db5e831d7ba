use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative bracket width at which the Luxemburg bisection stops.
pub const LUXEMBURG_REL_WIDTH: f64 = 1e-10;

/// Relative bracket width at which the `τ` bisection stops.
pub const TAU_REL_WIDTH: f64 = 1e-6;

/// Empirical Luxemburg norm for `φ(x) = exp(x²) - 1`: the `ν > 0` with
/// `(1/R) Σ (exp((eᵢ/ν)²) - 1) = 1`.
pub fn luxemburg_estimate(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(invalid("need at least one error"));
    }
    if let Some(bad) = errors.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(invalid(format!("errors must be finite and nonnegative, got {bad}")));
    }
    let e_max = errors.iter().copied().fold(0.0, f64::max);
    if e_max == 0.0 {
        return Ok(0.0);
    }
    let r = errors.len() as f64;
    let excess = |nu: f64| errors.iter().map(|e| ((e / nu).powi(2)).exp_m1()).sum::<f64>() / r - 1.0;
    let mut lo = e_max / (1.0 + r).ln().sqrt();
    let mut hi = e_max / std::f64::consts::LN_2.sqrt();
    while hi - lo > LUXEMBURG_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares fit `ln v ≈ ln C + rate · ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub log_c: f64,
    pub rate: f64,
}

impl RateFit {
    pub fn constant(&self) -> f64 {
        self.log_c.exp()
    }
}

pub fn fit_rate(n_grid: &[usize], values: &[f64]) -> Result<RateFit> {
    if n_grid.len() != values.len() {
        return Err(invalid("N grid and values differ in length"));
    }
    if n_grid.len() < 2 {
        return Err(invalid("need at least two points for a rate fit"));
    }
    if values.iter().any(|v| !(*v > 0.0)) || n_grid.contains(&0) {
        return Err(invalid("rate fit needs positive N and values"));
    }
    let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit needs at least two distinct N"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let rate = sxy / sxx;
    Ok(RateFit {
        log_c: my - rate * mx,
        rate,
    })
}

/// Constants entering the a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.alpha, self.sigma, self.tau, self.epsilon];
        if positive.iter().any(|v| !(*v > 0.0)) || self.n == 0 {
            return Err(invalid("bound parameters must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn mean_square(&self) -> f64 {
        bound_mean_square(self.alpha, self.sigma, self.n)
    }

    pub fn tail(&self) -> f64 {
        bound_tail_pinelis(self.alpha, self.tau, self.n, self.epsilon)
    }

    pub fn luxemburg(&self) -> f64 {
        bound_luxemburg(self.alpha, self.tau, self.n)
    }

    pub fn sample_size(&self) -> Result<u64> {
        sample_size_for(self.alpha, self.tau, self.epsilon, self.delta)
    }
}

/// `E ‖u* - u_N*‖² ≤ σ² / (α² N)`.
pub fn bound_mean_square(alpha: f64, sigma: f64, n: usize) -> f64 {
    sigma * sigma / (alpha * alpha * n as f64)
}

/// `P(‖u* - u_N*‖ ≥ ε) ≤ 2 exp(-N ε² α² / (3 τ²))`, capped at one.
pub fn bound_tail_pinelis(alpha: f64, tau: f64, n: usize, eps: f64) -> f64 {
    (2.0 * (-(n as f64) * eps * eps * alpha * alpha / (3.0 * tau * tau)).exp()).min(1.0)
}

/// Smallest `N ≥ 3 τ² ln(2/δ) / (α² ε²)`.
pub fn sample_size_for(alpha: f64, tau: f64, eps: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(alpha > 0.0 && tau > 0.0 && eps > 0.0) {
        return Err(invalid("alpha, tau and eps must be positive"));
    }
    Ok((3.0 * tau * tau * (2.0 / delta).ln() / (alpha * alpha * eps * eps)).ceil() as u64)
}

/// `‖u* - u_N*‖_{L_φ} ≤ 3√3 τ / (α √N)`.
pub fn bound_luxemburg(alpha: f64, tau: f64, n: usize) -> f64 {
    3.0 * 3f64.sqrt() * tau / (alpha * (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HilbertTailVariant {
    /// Exponential-square moment constant `τ`.
    ExpSquare,
    /// Variance constant `σ` of the `cosh` moment bound.
    Cosh,
}

/// `P(‖Z₁ + … + Z_N‖ ≥ N ε) ≤ 2 exp(-ε² N / (3 c²))`, capped at one. Both
/// variants share the formula; they differ in which constant is passed.
pub fn bound_hilbert_sum(c: f64, n: usize, eps: f64, _variant: HilbertTailVariant) -> f64 {
    (2.0 * (-eps * eps * n as f64 / (3.0 * c * c)).exp()).min(1.0)
}

/// `σ̂` and `τ̂` from gradient deviations `dᵢ = ‖∇G₁(u*, ξⁱ) - ∇F₁(u*)‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTau {
    pub sigma_hat: f64,
    pub tau_hat: f64,
    pub samples: usize,
}

/// `σ̂` is the root mean square of the deviations; `τ̂` the smallest `τ`
/// (to relative width [`TAU_REL_WIDTH`]) with `(1/M) Σ exp(dᵢ²/τ²) ≤ e`.
pub fn sigma_tau_from_deviations(deviations: &[f64]) -> Result<SigmaTau> {
    if deviations.len() < 2 {
        return Err(invalid("need at least two deviations"));
    }
    if deviations.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(invalid("deviations must be finite and nonnegative"));
    }
    let m = deviations.len() as f64;
    let sigma_hat = (deviations.iter().map(|d| d * d).sum::<f64>() / m).sqrt();
    let d_max = deviations.iter().copied().fold(0.0, f64::max);
    if sigma_hat == 0.0 {
        return Ok(SigmaTau {
            sigma_hat,
            tau_hat: 0.0,
            samples: deviations.len(),
        });
    }
    let moment = |tau: f64| deviations.iter().map(|d| (d * d / (tau * tau)).exp()).sum::<f64>() / m;
    let e = std::f64::consts::E;
    // Jensen gives moment(σ̂) ≥ e, and every term is at most e at d_max.
    let (mut lo, mut hi) = (sigma_hat, d_max.max(sigma_hat));
    if moment(lo) <= e {
        hi = lo;
    }
    while hi - lo > TAU_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if moment(mid) <= e {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SigmaTau {
        sigma_hat,
        tau_hat: hi,
        samples: deviations.len(),
    })
}

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}
