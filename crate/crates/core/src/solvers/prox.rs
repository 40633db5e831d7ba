use serde::{Deserialize, Serialize};

use crate::control::Regularizer;
use crate::error::{invalid, Result};

/// Pointwise proximal data for `(α/2) u² + γ |u| + I_{[a, b]}(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ProxSpec {
    pub fn new(alpha: f64, gamma: f64, bounds: Option<[f64; 2]>) -> Result<Self> {
        let [lower, upper] = bounds.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
        if !(alpha > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        if !(gamma >= 0.0) {
            return Err(invalid("gamma must be nonnegative"));
        }
        if !(lower < upper) {
            return Err(invalid(format!("bounds need a < b, got [{lower}, {upper}]")));
        }
        Ok(Self {
            alpha,
            gamma,
            lower,
            upper,
        })
    }

    pub fn from_regularizer(alpha: f64, reg: &Regularizer) -> Result<Self> {
        Self::new(alpha, reg.gamma, reg.bounds)
    }

    pub fn is_smooth(&self) -> bool {
        self.gamma == 0.0 && self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    /// `argmin_u (α/2) u² + γ |u| + I_{[a, b]}(u) - q u`.
    pub fn apply_scalar(&self, q: f64) -> f64 {
        let shrunk = q.signum() * (q.abs() - self.gamma).max(0.0) / self.alpha;
        shrunk.clamp(self.lower, self.upper)
    }

    /// Whether the prox is locally affine with slope `1/α` at `q`. Kinks
    /// (`|q| = γ`, or landing exactly on a bound) count as flat.
    pub fn is_inactive(&self, q: f64) -> bool {
        if q.abs() <= self.gamma {
            return false;
        }
        let shrunk = q.signum() * (q.abs() - self.gamma) / self.alpha;
        shrunk > self.lower && shrunk < self.upper
    }
}

pub fn prox(q: &[f64], spec: &ProxSpec) -> Vec<f64> {
    q.iter().map(|&v| spec.apply_scalar(v)).collect()
}
