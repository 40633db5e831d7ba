//! Replication experiments, error statistics, Luxemburg-norm estimation,
//! rate fitting and the a-priori bound formulas.

mod lq;
mod report;
mod stats;

pub use lq::LqExperiment;
pub use report::{
    json_digest, replicate, replication_seed, write_errors_csv, BoundSummary, ExceedanceRow, ReplicationRecord,
    SampleSizeStatistics, TailExperimentReport, CSV_HEADER, EXCEEDANCE_QUANTILES,
};
pub use stats::{
    binomial_se, bound_hilbert_sum, bound_luxemburg, bound_mean_square, bound_tail_pinelis, fit_rate,
    luxemburg_estimate, quantile, sample_size_for, sigma_tau_from_deviations, BoundParams, HilbertTailVariant,
    RateFit, SigmaTau, LUXEMBURG_REL_WIDTH, TAU_REL_WIDTH,
};

use crate::control::LqProblem;
use crate::error::Result;
use crate::solvers::{ReferenceStrategy, SolverOptions};

/// `R` replications of the SAA problem at each `N`, against the reference
/// solution computed with `strategy`.
pub fn run_replications(
    problem: &LqProblem,
    strategy: ReferenceStrategy,
    n_grid: &[usize],
    replications: usize,
    base_seed: u64,
) -> Result<TailExperimentReport> {
    LqExperiment::new(problem, strategy, SolverOptions::default())?.run(n_grid, replications, base_seed)
}

/// `σ̂`, `τ̂` from `M` fresh gradient deviations at the reference solution.
pub fn estimate_sigma_tau(problem: &LqProblem, strategy: ReferenceStrategy, m: usize, seed: u64) -> Result<SigmaTau> {
    LqExperiment::new(problem, strategy, SolverOptions::default())?.estimate_sigma_tau(m, seed)
}
