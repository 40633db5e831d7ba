use rayon::prelude::*;

use super::report::{json_digest, replicate, ReplicationRecord, TailExperimentReport};
use super::stats::{sigma_tau_from_deviations, SigmaTau};
use crate::control::{DiffusionModel, GradientOracle, LqProblem, SaaObjective, ScalarMoments, SmoothPart};
use crate::error::{invalid, Result};
use crate::solvers::{reference_atoms, solve, solve_reference, ProxSpec, ReferenceStrategy, SaaResult, SolverOptions};
use crate::stochastic::{derive_seed, draw, SampleSet};

/// How `F₁` and its sample versions are evaluated.
enum Evaluation<'a> {
    /// Scalar diffusion: two solves per gradient via moments of `ξ`.
    Moments {
        oracle: GradientOracle<'a>,
        /// `K₀*K₀ u*`
        gram_star: Vec<f64>,
    },
    /// One factorization per sample.
    PerSample,
}

/// A replication experiment on one LQ problem: the reference solution `u*`,
/// `∇F₁(u*)`, and the SAA solves behind every `(N, r)`.
pub struct LqExperiment<'a> {
    problem: &'a LqProblem,
    strategy: ReferenceStrategy,
    options: SolverOptions,
    prox: ProxSpec,
    reference: SaaResult,
    reference_gradient: Vec<f64>,
    evaluation: Evaluation<'a>,
}

impl<'a> LqExperiment<'a> {
    pub fn new(problem: &'a LqProblem, strategy: ReferenceStrategy, options: SolverOptions) -> Result<Self> {
        let prox = ProxSpec::from_regularizer(problem.alpha(), &problem.spec.regularizer)?;
        let reference = solve_reference(problem, strategy, &options)?;
        let (evaluation, reference_gradient) = match strategy {
            ReferenceStrategy::ExactMoments => {
                let oracle = GradientOracle::new(problem)?;
                let gram_star = oracle.gram(&reference.u)?;
                let grad = oracle.combine(&ScalarMoments::exact(&problem.spec.distribution)?, &gram_star);
                (Evaluation::Moments { oracle, gram_star }, grad)
            }
            ReferenceStrategy::AtomGrid { k } => {
                let atoms = reference_atoms(&problem.spec.distribution, k)?;
                let grad = SaaObjective::new(problem, &atoms)?.gradient(&reference.u)?;
                let evaluation = if problem.spec.diffusion == DiffusionModel::Scalar {
                    let oracle = GradientOracle::new(problem)?;
                    let gram_star = oracle.gram(&reference.u)?;
                    Evaluation::Moments { oracle, gram_star }
                } else {
                    Evaluation::PerSample
                };
                (evaluation, grad)
            }
        };
        Ok(Self {
            problem,
            strategy,
            options,
            prox,
            reference,
            reference_gradient,
            evaluation,
        })
    }

    pub fn problem(&self) -> &LqProblem {
        self.problem
    }

    pub fn strategy(&self) -> ReferenceStrategy {
        self.strategy
    }

    pub fn reference(&self) -> &SaaResult {
        &self.reference
    }

    /// `∇F₁(u*)`
    pub fn reference_gradient(&self) -> &[f64] {
        &self.reference_gradient
    }

    /// SAA solution for the given samples, with `‖∇F_N(u*) - ∇F(u*)‖`.
    pub fn solve_samples(&self, samples: &SampleSet) -> Result<(SaaResult, f64)> {
        let u_star = &self.reference.u;
        let (mut result, grad_n) = match &self.evaluation {
            Evaluation::Moments { oracle, gram_star } => {
                let moments = ScalarMoments::empirical(samples);
                let result = solve(&oracle.with_moments(moments), &self.prox, &self.options)?;
                (result, oracle.combine(&moments, gram_star))
            }
            Evaluation::PerSample => {
                let smooth = SaaObjective::new(self.problem, samples)?;
                let result = solve(&smooth, &self.prox, &self.options)?;
                let grad = smooth.gradient(u_star)?;
                (result, grad)
            }
        };
        result.n_samples = samples.len();
        result.seed = Some(samples.seed);
        let diff: Vec<f64> = grad_n.iter().zip(&self.reference_gradient).map(|(a, b)| a - b).collect();
        Ok((result, self.problem.space.norm(&diff)))
    }

    pub fn solve_one(&self, n: usize, replication: usize, seed: u64) -> Result<ReplicationRecord> {
        let samples = draw(&self.problem.spec.distribution, n, seed)?;
        let (result, deviation) = self.solve_samples(&samples)?;
        Ok(ReplicationRecord {
            n,
            replication,
            seed,
            error: self.problem.space.distance(&self.reference.u, &result.u),
            kkt_residual: result.kkt_residual,
            iterations: result.iterations,
            gradient_deviation: Some(deviation),
        })
    }

    /// Digest of everything that determines the replication errors.
    pub fn digest(&self) -> Result<String> {
        json_digest(&(&self.problem.spec, self.strategy, self.options))
    }

    /// `R` replications at every `N`; replication `r` at size `N` uses the
    /// seed derived from `(base_seed, N, r)`.
    pub fn run(&self, n_grid: &[usize], replications: usize, base_seed: u64) -> Result<TailExperimentReport> {
        let records = replicate(n_grid, replications, base_seed, |n, r, seed| self.solve_one(n, r, seed))?;
        TailExperimentReport::build(n_grid, replications, base_seed, self.digest()?, records)
    }

    /// Deviations `‖∇G₁(u*, ξⁱ) - ∇F₁(u*)‖` for `M` fresh draws.
    pub fn gradient_deviations(&self, m: usize, seed: u64) -> Result<Vec<f64>> {
        if m < 2 {
            return Err(invalid("need at least two deviation samples"));
        }
        let samples = draw(&self.problem.spec.distribution, m, seed)?;
        let u_star = &self.reference.u;
        (0..m)
            .into_par_iter()
            .map(|i| {
                let xi = samples.get(i);
                let g = match &self.evaluation {
                    Evaluation::Moments { oracle, gram_star } => oracle.sample_gradient_from_gram(gram_star, xi),
                    Evaluation::PerSample => self.problem.sample_gradient_smooth(u_star, xi)?,
                };
                let diff: Vec<f64> = g.iter().zip(&self.reference_gradient).map(|(a, b)| a - b).collect();
                Ok(self.problem.space.norm(&diff))
            })
            .collect()
    }

    pub fn estimate_sigma_tau(&self, m: usize, seed: u64) -> Result<SigmaTau> {
        sigma_tau_from_deviations(&self.gradient_deviations(m, seed)?)
    }

    /// Seed used for the `σ̂`/`τ̂` draws so they never coincide with a replication.
    pub fn deviation_seed(base_seed: u64) -> u64 {
        derive_seed(base_seed, &[u64::MAX])
    }
}
