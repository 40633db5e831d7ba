//! The linear-quadratic elliptic control problem with random coefficients:
//! state and adjoint solves, sample-average gradients and Hessian-vector
//! products, and the two-solve exact gradient for scalar diffusion.

mod objective;
mod problem;
mod spectrum;

pub use objective::{
    full_gradient, full_hessvec, full_value, GradientOracle, MomentObjective, SaaObjective, ScalarMoments,
    SmoothPart, ZeroSmooth,
};
pub use problem::{
    separable_rhs_profile, DiffusionModel, LqProblem, LqProblemSpec, Regularizer, RhsModel, SampleSystem,
    TargetField,
};
pub use spectrum::{f1_hessian_spectrum, HessianSpectrum, DENSE_HESSIAN_MAX_DIM};

use crate::error::Result;
use crate::stochastic::SampleSet;

/// `∇f_N(u) = (1/N) Σ ∇_u G₁(u, ξⁱ) + α u`.
pub fn saa_gradient(problem: &LqProblem, u: &[f64], samples: &SampleSet) -> Result<Vec<f64>> {
    full_gradient(&SaaObjective::new(problem, samples)?, problem.alpha(), u)
}

/// `∇F₁,N(u)` without the `α`-term.
pub fn saa_gradient_smooth(problem: &LqProblem, u: &[f64], samples: &SampleSet) -> Result<Vec<f64>> {
    SaaObjective::new(problem, samples)?.gradient(u)
}

/// `f_N(u) = (1/N) Σ G₁(u, ξⁱ) + (α/2) ‖u‖²`.
pub fn saa_value(problem: &LqProblem, u: &[f64], samples: &SampleSet) -> Result<f64> {
    full_value(&SaaObjective::new(problem, samples)?, problem.alpha(), u)
}

/// `(1/N) Σ K(ξⁱ)* K(ξⁱ) v + α v`.
pub fn saa_hessvec(problem: &LqProblem, v: &[f64], samples: &SampleSet) -> Result<Vec<f64>> {
    full_hessvec(&SaaObjective::new(problem, samples)?, problem.alpha(), v)
}

/// `∇F₁(u)` of the scalar model from moments of `ξ`; exact moments give the
/// true gradient, empirical moments the SAA gradient. Two solves per call.
pub fn true_gradient_example1(oracle: &GradientOracle<'_>, moments: &ScalarMoments, u: &[f64]) -> Result<Vec<f64>> {
    oracle.gradient(moments, u)
}

/// Smallest nonzero eigenvalue of `∇²F₁` (the `α`-term excluded).
pub fn f1_hessian_min_eig(smooth: &dyn SmoothPart) -> Result<f64> {
    Ok(f1_hessian_spectrum(smooth, 0.0)?.min_nonzero)
}
