use rayon::prelude::*;

use super::problem::{DiffusionModel, LqProblem, SampleSystem};
use crate::error::{Result, SaaError};
use crate::fem::{ControlSpace, SpdSolver};
use crate::linalg::{axpy, dot};
use crate::stochastic::{truncated_normal_inverse_moments, ParamDistribution, SampleSet};

/// The smooth part `F₁` (or its sample average `F₁,N`) of a reduced
/// objective. None of the methods include the `α`-term.
pub trait SmoothPart: Sync {
    fn space(&self) -> ControlSpace;
    fn value(&self, u: &[f64]) -> Result<f64>;
    /// L² gradient.
    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>>;
    /// L² Hessian applied to `v`. The smooth part is quadratic, so the
    /// Hessian does not depend on the linearization point.
    fn hessvec(&self, v: &[f64]) -> Result<Vec<f64>>;
}

/// `f(u) = F₁(u) + (α/2) ‖u‖²`.
pub fn full_value(smooth: &dyn SmoothPart, alpha: f64, u: &[f64]) -> Result<f64> {
    let space = smooth.space();
    Ok(smooth.value(u)? + 0.5 * alpha * space.inner(u, u))
}

/// `∇f(u) = ∇F₁(u) + α u`.
pub fn full_gradient(smooth: &dyn SmoothPart, alpha: f64, u: &[f64]) -> Result<Vec<f64>> {
    let mut g = smooth.gradient(u)?;
    axpy(alpha, u, &mut g);
    Ok(g)
}

/// `∇²f v = ∇²F₁ v + α v`.
pub fn full_hessvec(smooth: &dyn SmoothPart, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
    let mut h = smooth.hessvec(v)?;
    axpy(alpha, v, &mut h);
    Ok(h)
}

/// Sums per-sample vectors in sample order and divides by the count, so the
/// result does not depend on how the samples were scheduled.
fn ordered_mean(parts: Vec<Vec<f64>>) -> Vec<f64> {
    let count = parts.len() as f64;
    let mut iter = parts.into_iter();
    let mut acc = iter.next().unwrap_or_default();
    for part in iter {
        for (a, p) in acc.iter_mut().zip(&part) {
            *a += p;
        }
    }
    for a in &mut acc {
        *a /= count;
    }
    acc
}

/// Sample average `F₁,N(u) = (1/N) Σ G₁(u, ξⁱ)` with one factorized state
/// operator per sample. Per-sample work runs in parallel.
pub struct SaaObjective<'a> {
    problem: &'a LqProblem,
    systems: Vec<SampleSystem>,
}

impl<'a> SaaObjective<'a> {
    pub fn new(problem: &'a LqProblem, samples: &SampleSet) -> Result<Self> {
        if samples.is_empty() {
            return Err(SaaError::InvalidArgument("empty sample set".into()));
        }
        let rows: Vec<&[f64]> = samples.iter().collect();
        let systems = rows
            .par_iter()
            .map(|xi| problem.sample_system(xi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, systems })
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn problem(&self) -> &LqProblem {
        self.problem
    }

    fn mean_over<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&SampleSystem) -> Result<Vec<f64>> + Sync + Send,
    {
        let parts = self.systems.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(ordered_mean(parts))
    }

    /// Per-sample gradients, in sample order.
    pub fn sample_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.systems
            .par_iter()
            .map(|s| self.problem.gradient_with(s, u))
            .collect()
    }
}

impl SmoothPart for SaaObjective<'_> {
    fn space(&self) -> ControlSpace {
        self.problem.space
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        let values = self
            .systems
            .par_iter()
            .map(|s| self.problem.value_with(s, u))
            .collect::<Result<Vec<_>>>()?;
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.mean_over(|s| self.problem.gradient_with(s, u))
    }

    fn hessvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.mean_over(|s| self.problem.hessvec_with(s, v))
    }
}

/// Moments of `ξ` that determine `F₁` for the scalar diffusion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMoments {
    /// `E[1/ξ₁]`
    pub m1: f64,
    /// `E[1/ξ₁²]`
    pub m2: f64,
    /// `E[ξ₂/ξ₁²]`
    pub mc: f64,
    /// `E[ξ₂/ξ₁]`
    pub m_source: f64,
    /// `E[ξ₂²/ξ₁²]`
    pub m_source_sq: f64,
}

impl ScalarMoments {
    pub fn empirical(samples: &SampleSet) -> Self {
        let n = samples.len() as f64;
        let mut m = Self {
            m1: 0.0,
            m2: 0.0,
            mc: 0.0,
            m_source: 0.0,
            m_source_sq: 0.0,
        };
        for xi in samples.iter() {
            let inv = 1.0 / xi[0];
            let s = xi.get(1).copied().unwrap_or(0.0);
            m.m1 += inv;
            m.m2 += inv * inv;
            m.mc += s * inv * inv;
            m.m_source += s * inv;
            m.m_source_sq += s * s * inv * inv;
        }
        m.m1 /= n;
        m.m2 /= n;
        m.mc /= n;
        m.m_source /= n;
        m.m_source_sq /= n;
        m
    }

    /// Exact moments for independent `ξ₁` (truncated normal or positive
    /// uniform) and `ξ₂`.
    pub fn exact(distribution: &ParamDistribution) -> Result<Self> {
        let comps = distribution.components();
        let (m1, m2) = match comps[0] {
            ParamDistribution::TruncatedNormal { lo, hi, mean, sd } => {
                let m = truncated_normal_inverse_moments(*lo, *hi, *mean, *sd)?;
                (m.m1, m.m2)
            }
            ParamDistribution::Uniform { lo, hi } if *lo > 0.0 => {
                ((hi / lo).ln() / (hi - lo), 1.0 / (lo * hi))
            }
            other => {
                return Err(SaaError::ModelMismatch(format!(
                    "no closed-form inverse moments for {other:?}"
                )))
            }
        };
        let (s1, s2) = match comps.get(1) {
            None => (0.0, 0.0),
            Some(d) => (
                d.mean().ok_or_else(|| SaaError::ModelMismatch("source law has no scalar mean".into()))?,
                d.second_moment()
                    .ok_or_else(|| SaaError::ModelMismatch("source law has no scalar moment".into()))?,
            ),
        };
        Ok(Self {
            m1,
            m2,
            mc: s1 * m2,
            m_source: s1 * m1,
            m_source_sq: s2 * m2,
        })
    }
}

/// Precomputed data for evaluating `∇F₁` of the scalar-diffusion model
/// with two solves against the unit-coefficient stiffness `A₀`.
///
/// With `A(ξ) = ξ₁ A₀` and `g(ξ) = ξ₂ g₀` the state is
/// `y = (y₀(u) + ξ₂ ỹ₀) / ξ₁`, so every expectation reduces to moments of
/// `ξ` times a handful of fixed vectors.
pub struct GradientOracle<'a> {
    problem: &'a LqProblem,
    unit_solver: SpdSolver,
    /// `ỹ₀ = A₀⁻¹ g₀`
    source_state: Vec<f64>,
    /// `K₀* ỹ₀`
    source_adjoint: Vec<f64>,
    /// `K₀* y_d`
    target_adjoint: Vec<f64>,
    source_mass_sq: f64,
    source_target: f64,
}

impl<'a> GradientOracle<'a> {
    pub fn new(problem: &'a LqProblem) -> Result<Self> {
        if problem.spec.diffusion != DiffusionModel::Scalar {
            return Err(SaaError::ModelMismatch(
                "the two-solve gradient needs the scalar diffusion model".into(),
            ));
        }
        let unit_solver = problem.sample_system(&[1.0, 0.0])?.solver;
        let source_state = unit_solver.solve(&problem.rhs_load)?;
        let m_source = problem.mass.matvec(&source_state);
        let source_adjoint = problem.load_adjoint(&unit_solver.solve(&m_source)?);
        let target_adjoint = problem.load_adjoint(&unit_solver.solve(&problem.target_load)?);
        Ok(Self {
            source_mass_sq: dot(&source_state, &m_source),
            source_target: dot(&source_state, &problem.target_load),
            problem,
            unit_solver,
            source_state,
            source_adjoint,
            target_adjoint,
        })
    }

    pub fn problem(&self) -> &LqProblem {
        self.problem
    }

    fn unit_state(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.unit_solver.solve(&self.problem.load.matvec(u))
    }

    /// `K₀* K₀ v`, two solves.
    pub fn gram(&self, v: &[f64]) -> Result<Vec<f64>> {
        let y = self.unit_state(v)?;
        let p = self.unit_solver.solve(&self.problem.mass.matvec(&y))?;
        Ok(self.problem.load_adjoint(&p))
    }

    pub fn source_adjoint(&self) -> &[f64] {
        &self.source_adjoint
    }

    pub fn target_adjoint(&self) -> &[f64] {
        &self.target_adjoint
    }

    /// `∇F₁(u) = m₂ K₀*K₀ u + m_c K₀*ỹ₀ - m₁ K₀*y_d`.
    pub fn gradient(&self, moments: &ScalarMoments, u: &[f64]) -> Result<Vec<f64>> {
        let gram = self.gram(u)?;
        Ok(self.combine(moments, &gram))
    }

    /// Combines a precomputed `K₀*K₀ u` with the fixed vectors.
    pub fn combine(&self, moments: &ScalarMoments, gram: &[f64]) -> Vec<f64> {
        gram.iter()
            .zip(&self.source_adjoint)
            .zip(&self.target_adjoint)
            .map(|((g, s), t)| moments.m2 * g + moments.mc * s - moments.m1 * t)
            .collect()
    }

    /// Per-sample gradient `∇_u G₁(u, ξ)` from a precomputed `K₀*K₀ u`.
    pub fn sample_gradient_from_gram(&self, gram: &[f64], xi: &[f64]) -> Vec<f64> {
        let inv = 1.0 / xi[0];
        let s = xi.get(1).copied().unwrap_or(0.0);
        let moments = ScalarMoments {
            m1: inv,
            m2: inv * inv,
            mc: s * inv * inv,
            m_source: s * inv,
            m_source_sq: s * s * inv * inv,
        };
        self.combine(&moments, gram)
    }

    pub fn value(&self, moments: &ScalarMoments, u: &[f64]) -> Result<f64> {
        let y0 = self.unit_state(u)?;
        let my0 = self.problem.mass.matvec(&y0);
        Ok(0.5
            * (moments.m2 * dot(&y0, &my0)
                + 2.0 * moments.mc * dot(&my0, &self.source_state)
                + moments.m_source_sq * self.source_mass_sq
                - 2.0 * moments.m1 * dot(&y0, &self.problem.target_load)
                - 2.0 * moments.m_source * self.source_target
                + self.problem.target_sq))
    }

    pub fn with_moments(&self, moments: ScalarMoments) -> MomentObjective<'_, 'a> {
        MomentObjective { oracle: self, moments }
    }
}

/// `F₁` (exact moments) or `F₁,N` (empirical moments) of the scalar model.
pub struct MomentObjective<'o, 'a> {
    oracle: &'o GradientOracle<'a>,
    pub moments: ScalarMoments,
}

impl SmoothPart for MomentObjective<'_, '_> {
    fn space(&self) -> ControlSpace {
        self.oracle.problem.space
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        self.oracle.value(&self.moments, u)
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.oracle.gradient(&self.moments, u)
    }

    fn hessvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut h = self.oracle.gram(v)?;
        for x in &mut h {
            *x *= self.moments.m2;
        }
        Ok(h)
    }
}

/// `F₁ ≡ 0`, for exercising solvers on the regularizer alone.
pub struct ZeroSmooth {
    pub space: ControlSpace,
}

impl SmoothPart for ZeroSmooth {
    fn space(&self) -> ControlSpace {
        self.space
    }

    fn value(&self, _u: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; u.len()])
    }

    fn hessvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; v.len()])
    }
}
