//! Closed-form and Monte Carlo cases: the optimality example for the tail
//! bound, the log-normal counterexample to the exponential moment
//! condition, finite- versus infinite-dimensional sample sizes, and direct
//! checks of the concentration inequalities.

mod concentration;
mod dimension;
mod lognormal;
mod optimality;

pub use concentration::{
    check_exp_moment_inequality, check_hilbert_sum_tail, exp_moment_sigma_sq, ExpMomentReport, ExpMomentRow,
    HilbertTailReport, HilbertTailRow, HILBERT_EPS_MULTIPLIERS,
};
pub use dimension::{
    basel_second_moment, dimension_demo_finite, dimension_demo_infinite, gaussian_mean_square_norm, FiniteDimRow,
    InfiniteDimReport,
};
pub use lognormal::{
    lognormal_deviation, lognormal_gradient_norm, lognormal_normal_equation_residual, lognormal_optimal_coefficient,
    lognormal_threshold, lognormal_threshold_violations, lognormal_violation_evidence, lognormal_yd_norm,
    ExpMomentSeries, LognormalDemoSpec, LognormalReport,
};
pub use optimality::{
    chi2_exp_moment, optimality_example_errors, optimality_exact_tail, optimality_gap_constant,
    optimality_tail_table, optimality_tau_sq, tail_exponent_ratio, OptimalityExampleSpec, OptimalityTailRow,
};

use rayon::prelude::*;

use crate::stochastic::{derive_seed, rng_from_seed, SaaRng};

/// Trials per independently seeded shard.
pub const SHARD_SIZE: usize = 10_000;

/// Splits `trials` into shards of [`SHARD_SIZE`], each with its own generator
/// seeded from `(seed, shard)`, and returns the shard results in order.
pub(crate) fn sharded<T, F>(trials: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SaaRng, usize) -> T + Sync,
{
    let shards = trials.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|i| {
            let count = SHARD_SIZE.min(trials - i * SHARD_SIZE);
            let mut rng = rng_from_seed(derive_seed(seed, &[i as u64]));
            f(&mut rng, count)
        })
        .collect()
}
