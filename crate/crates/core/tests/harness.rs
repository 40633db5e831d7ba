use saa_core::control::{LqProblem, LqProblemSpec};
use saa_core::harness::{LqExperiment, TailExperimentReport};
use saa_core::solvers::{ReferenceStrategy, SolverOptions};
use saa_core::stochastic::ParamDistribution;

fn point_mass_problem() -> LqProblem {
    let mut spec = LqProblemSpec::example2(4, 1);
    spec.distribution = ParamDistribution::DiscreteGrid2D {
        lo: [4.0, 1.0],
        hi: [4.0, 1.0],
        k: 1,
    };
    LqProblem::new(spec).unwrap()
}

#[test]
fn zero_randomness_gives_zero_error() {
    let problem = point_mass_problem();
    let exp = LqExperiment::new(&problem, ReferenceStrategy::AtomGrid { k: 1 }, SolverOptions::default()).unwrap();
    let report = exp.run(&[1, 3], 2, 0).unwrap();
    assert!(report.records.iter().all(|r| r.error <= 1e-8));
    let st = exp.estimate_sigma_tau(10, 1).unwrap();
    assert!(st.sigma_hat <= 1e-8);
}

fn small_run(seed: u64) -> TailExperimentReport {
    let problem = LqProblem::new(LqProblemSpec::example1(8)).unwrap();
    let exp = LqExperiment::new(&problem, ReferenceStrategy::ExactMoments, SolverOptions::default()).unwrap();
    let mut report = exp.run(&[2, 8, 32], 12, seed).unwrap();
    let st = exp.estimate_sigma_tau(2000, seed + 1).unwrap();
    report.attach_bounds(problem.alpha(), &st);
    report
}

#[test]
fn reports_are_bit_reproducible() {
    let (a, b) = (small_run(5), small_run(5));
    assert_eq!(a, b);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_errors_csv(&mut ca).unwrap();
    b.write_errors_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_ne!(a.records, small_run(6).records);
}

#[test]
fn bounds_hold_on_a_small_run() {
    let report = small_run(11);
    let bounds = report.bounds.as_ref().unwrap();
    assert!(bounds.tau_hat >= bounds.sigma_hat);
    for (stats, &n) in report.per_n.iter().zip(&report.n_grid) {
        let bound = saa_core::harness::bound_mean_square(bounds.alpha, 1.5 * bounds.sigma_hat, n);
        assert!(stats.mean_square_error <= bound);
    }
    assert!(report.exceedance.iter().all(|row| row.dominated()));
    for r in &report.records {
        assert!(bounds.alpha * r.error <= r.gradient_deviation.unwrap() + 1e-8);
    }
}

#[test]
fn summary_json_omits_raw_records() {
    let report = small_run(3);
    let json = serde_json::to_value(&report).unwrap();
    assert!(json.get("records").is_none());
    assert_eq!(json["n_grid"], serde_json::json!([2, 8, 32]));
}
