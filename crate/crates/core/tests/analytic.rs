use std::f64::consts::E;

use saa_core::analytic::*;
use saa_core::harness::{bound_tail_pinelis, fit_rate};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn scaled_squared_error_has_chi_square_two_mean() {
    let spec = OptimalityExampleSpec {
        alpha: 0.5,
        n: 8,
        replications: 100_000,
        seed: 17,
    };
    let errors = optimality_example_errors(&spec).unwrap();
    let mean = errors.iter().map(|e| (spec.alpha * e).powi(2) * spec.n as f64).sum::<f64>() / errors.len() as f64;
    assert!((mean - 2.0).abs() <= 0.04, "mean = {mean}");
}

#[test]
fn optimality_pipeline_reproduces_half_rate() {
    let grid = [4usize, 16, 64, 256];
    let means: Vec<f64> = grid
        .iter()
        .map(|&n| {
            let spec = OptimalityExampleSpec {
                alpha: 1.0,
                n,
                replications: 4000,
                seed: n as u64,
            };
            let e = optimality_example_errors(&spec).unwrap();
            e.iter().sum::<f64>() / e.len() as f64
        })
        .collect();
    let fit = fit_rate(&grid, &means).unwrap();
    assert!((fit.rate + 0.5).abs() <= 0.05, "rate = {}", fit.rate);
}

#[test]
fn pinelis_dominates_exact_tail_on_grid() {
    let tau = optimality_tau_sq().sqrt();
    for alpha in [1e-3, 0.1, 1.0] {
        for n in [1usize, 4, 64, 1024] {
            for k in 0..50 {
                let eps = k as f64 * 0.1 / (alpha * (n as f64).sqrt());
                assert!(bound_tail_pinelis(alpha, tau, n, eps) >= optimality_exact_tail(alpha, n, eps));
            }
        }
    }
}

#[test]
fn finite_dimension_demo() {
    let msq = gaussian_mean_square_norm(10, 1.0, 100_000, 2).unwrap();
    assert!((msq - 10.0).abs() <= 0.1);
    let rows = dimension_demo_finite(10, 1.0, 0.1, &[50, 100, 400], 100_000, 4).unwrap();
    for r in &rows {
        assert!((r.chi2_mean - 10.0).abs() <= 0.2, "{r:?}");
        let exact = ChiSquared::new(10.0).unwrap().sf(r.n as f64 * 0.1);
        assert!((r.exceedance - exact).abs() <= 0.01);
    }
    assert!(rows[0].exceedance >= 0.3);
    assert!(rows.windows(2).all(|w| w[1].exceedance < w[0].exceedance));
}

#[test]
fn infinite_dimension_demo() {
    let report = dimension_demo_infinite(100, 1.0, 0.5, 0.05, 10_000, 8).unwrap();
    assert!(report.success_frequency >= 0.95);
}

#[test]
fn lognormal_evidence_grows_while_contrast_stabilizes() {
    let report = lognormal_violation_evidence(&LognormalDemoSpec::default()).unwrap();
    assert!(report.normal_equation_residual.abs() <= 1e-12);
    let ln = report.series.iter().find(|s| s.law == "lognormal").unwrap();
    let tn = report.series.iter().find(|s| s.law == "truncated_normal").unwrap();
    assert!(ln.growing, "{ln:?}");
    assert!(tn.stabilized && tn.estimates.iter().all(|&v| v < E), "{tn:?}");
}

#[test]
fn concentration_inequalities_hold() {
    let em = check_exp_moment_inequality(1.0, &[0.0, 0.25, 0.5, 1.0, 1.5, 2.0], 200_000, 1).unwrap();
    assert_eq!(em.violations(), 0);
    let row = em.rows.iter().find(|r| r.lambda == 1.0).unwrap();
    assert!(row.lhs < row.rhs);
    let slack: Vec<f64> = em.rows.iter().map(|r| r.rhs - r.lhs).collect();
    assert!(slack.windows(2).skip(3).all(|w| w[1] > w[0]));
    let ht = check_hilbert_sum_tail(2, 10, 100_000, 3).unwrap();
    assert_eq!(ht.violations(), 0);
    for r in &ht.rows {
        assert!((r.exact - (-(10.0) * r.epsilon * r.epsilon / 2.0).exp()).abs() < 1e-12);
        assert!(r.exact <= r.bound);
    }
}
