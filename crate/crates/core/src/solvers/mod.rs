//! Solvers for the discretized SAA and reference problems: the pointwise
//! prox of the nonsmooth part, semismooth Newton on the normal map, and
//! Newton-CG for the smooth case.

mod newton;
mod prox;

pub use newton::{newton_cg, normal_map_residual, semismooth_newton, solve, SaaResult, SolverOptions};
pub use prox::{prox, ProxSpec};

use serde::{Deserialize, Serialize};

use crate::control::{DiffusionModel, GradientOracle, LqProblem, SaaObjective, ScalarMoments};
use crate::error::{Result, SaaError};
use crate::stochastic::{discrete_grid, ParamDistribution, SampleSet};

/// How the reference solution `u*` of the true problem is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceStrategy {
    /// Exact moments of `ξ` in the two-solve gradient (scalar diffusion only).
    ExactMoments,
    /// Expectation replaced by the equal-weight `k × k` atom grid spanning the
    /// support of `ξ`.
    AtomGrid { k: usize },
}

/// Solve the SAA problem for the given samples, choosing the two-solve
/// evaluation for scalar diffusion and per-sample solves otherwise.
pub fn solve_saa(problem: &LqProblem, samples: &SampleSet, opts: &SolverOptions) -> Result<SaaResult> {
    let spec = ProxSpec::from_regularizer(problem.alpha(), &problem.spec.regularizer)?;
    let mut result = if problem.spec.diffusion == DiffusionModel::Scalar {
        let oracle = GradientOracle::new(problem)?;
        solve(&oracle.with_moments(ScalarMoments::empirical(samples)), &spec, opts)?
    } else {
        solve(&SaaObjective::new(problem, samples)?, &spec, opts)?
    };
    result.n_samples = samples.len();
    result.seed = Some(samples.seed);
    Ok(result)
}

/// The atom grid used by [`ReferenceStrategy::AtomGrid`].
pub fn reference_atoms(distribution: &ParamDistribution, k: usize) -> Result<SampleSet> {
    let grid = match distribution {
        ParamDistribution::DiscreteGrid2D { lo, hi, .. } => discrete_grid(*lo, *hi, k)?,
        ParamDistribution::Product { components } => match components.as_slice() {
            [ParamDistribution::Uniform { lo: a0, hi: b0 }, ParamDistribution::Uniform { lo: a1, hi: b1 }] => {
                discrete_grid([*a0, *a1], [*b0, *b1], k)?
            }
            _ => return Err(no_grid(distribution)),
        },
        _ => return Err(no_grid(distribution)),
    };
    let rows: Vec<Vec<f64>> = grid.atoms().unwrap_or_default().iter().map(|a| a.to_vec()).collect();
    SampleSet::from_rows(grid, &rows)
}

fn no_grid(distribution: &ParamDistribution) -> SaaError {
    SaaError::ModelMismatch(format!("no atom grid for {distribution:?}"))
}

/// Reference solution `u*` of the true (expected-value) problem.
pub fn solve_reference(problem: &LqProblem, strategy: ReferenceStrategy, opts: &SolverOptions) -> Result<SaaResult> {
    let spec = ProxSpec::from_regularizer(problem.alpha(), &problem.spec.regularizer)?;
    match strategy {
        ReferenceStrategy::ExactMoments => {
            let oracle = GradientOracle::new(problem)?;
            let moments = ScalarMoments::exact(&problem.spec.distribution)?;
            solve(&oracle.with_moments(moments), &spec, opts)
        }
        ReferenceStrategy::AtomGrid { k } => {
            let atoms = reference_atoms(&problem.spec.distribution, k)?;
            let mut result = solve(&SaaObjective::new(problem, &atoms)?, &spec, opts)?;
            result.n_samples = atoms.len();
            Ok(result)
        }
    }
}
