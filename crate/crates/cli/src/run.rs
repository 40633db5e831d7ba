use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use saa_core::analytic::{
    check_exp_moment_inequality, check_hilbert_sum_tail, chi2_exp_moment, dimension_demo_finite,
    dimension_demo_infinite, gaussian_mean_square_norm, lognormal_threshold_violations, lognormal_violation_evidence,
    optimality_gap_constant, optimality_tail_table, optimality_tau_sq, tail_exponent_ratio, LognormalDemoSpec,
};
use saa_core::control::LqProblem;
use saa_core::harness::{
    bound_luxemburg, bound_mean_square, json_digest, sample_size_for, LqExperiment, ReplicationRecord,
    TailExperimentReport,
};
use saa_core::solvers::solve_saa;
use saa_core::stochastic::{derive_seed, draw};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::CliError;

/// Files written by one run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }
}

fn solver_err(e: saa_core::SaaError) -> CliError {
    CliError::Solver(e.to_string())
}

fn config_err(e: saa_core::SaaError) -> CliError {
    CliError::Config(e.to_string())
}

/// Runs a resolved configuration and writes its artifacts into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let mut out = Output::create(out_dir)?;
    let summary = match config.kind {
        ExperimentKind::Example1 | ExperimentKind::Example2 => run_lq(config, &mut out)?,
        ExperimentKind::SolveOnce => run_solve_once(config, &mut out)?,
        ExperimentKind::Optimality5 => run_optimality(config, &mut out)?,
        ExperimentKind::Lognormal61 => run_lognormal(config)?,
        ExperimentKind::Dimension8 => run_dimension(config)?,
        ExperimentKind::Bounds3 => run_bounds(config)?,
    };
    let config_value = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
    out.write_json(
        "summary.json",
        &json!({
            "kind": config.kind,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config_value,
            "results": summary,
        }),
    )?;
    let manifest = json!({
        "config_digest": json_digest(config).map_err(config_err)?,
        "seed": config.seed,
        "versions": {
            "saa-cli": env!("CARGO_PKG_VERSION"),
            "saa-core": saa_core::VERSION,
        },
        "files": out.files.iter().cloned().chain(["manifest.json".to_string()]).collect::<Vec<_>>(),
    });
    out.write_json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        out_dir: out.dir,
        files: out.files,
    })
}

fn build_problem(config: &ExperimentConfig) -> Result<LqProblem, CliError> {
    LqProblem::new(config.problem_spec()?).map_err(config_err)
}

fn write_field(out: &mut Output, name: &str, problem: &LqProblem, u: &[f64]) -> Result<(), CliError> {
    let mesh = &problem.mesh;
    out.write_with(name, |w| {
        writeln!(w, "# n={}", mesh.n())?;
        writeln!(w, "cell_index,x_center,y_center,u_value")?;
        for (c, value) in u.iter().enumerate() {
            let [x, y] = mesh.centroid(c);
            writeln!(w, "{c},{x:.16e},{y:.16e},{value:.16e}")?;
        }
        Ok(())
    })
}

fn run_lq(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let problem = build_problem(config)?;
    let strategy = config.reference.ok_or_else(|| CliError::Config("reference is unset".into()))?;
    let n_grid = config.n_grid.clone().unwrap_or_default();
    let replications = config.replications.unwrap_or(1);
    let experiment = LqExperiment::new(&problem, strategy, config.solver).map_err(solver_err)?;
    let mut report = experiment.run(&n_grid, replications, config.seed).map_err(solver_err)?;
    let m = config.deviation_samples.unwrap_or(10_000);
    let st = experiment
        .estimate_sigma_tau(m, LqExperiment::deviation_seed(config.seed))
        .map_err(solver_err)?;
    report.attach_bounds(problem.alpha(), &st);

    out.write_with("errors.csv", |w| report.write_errors_csv(w))?;
    write_field(out, "reference_u.csv", &problem, &experiment.reference().u)?;

    let alpha = problem.alpha();
    let a_posteriori_violations = report
        .records
        .iter()
        .filter(|r| r.gradient_deviation.is_some_and(|d| alpha * r.error > d + 1e-8))
        .count();
    let mse_within_bound: Vec<bool> = report
        .per_n
        .iter()
        .zip(&n_grid)
        .map(|(s, &n)| s.mean_square_error <= 1.5 * bound_mean_square(alpha, st.sigma_hat, n))
        .collect();
    let reference = experiment.reference();
    Ok(json!({
        "report": report,
        "reference": {
            "strategy": strategy,
            "kkt_residual": reference.kkt_residual,
            "iterations": reference.iterations,
            "l2_norm": problem.space.norm(&reference.u),
            "cells": reference.u.len(),
        },
        "checks": {
            "a_posteriori_violations": a_posteriori_violations,
            "mse_within_bound": mse_within_bound,
            "exceedance_dominated": report.exceedance.iter().all(|r| r.dominated()),
        },
    }))
}

fn run_solve_once(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let problem = build_problem(config)?;
    let n = config.samples.unwrap_or(1);
    let samples = draw(&problem.spec.distribution, n, config.seed).map_err(config_err)?;
    let result = solve_saa(&problem, &samples, &config.solver).map_err(solver_err)?;
    write_field(out, "solution_u.csv", &problem, &result.u)?;
    Ok(json!({
        "samples": n,
        "kkt_residual": result.kkt_residual,
        "iterations": result.iterations,
        "cg_iterations": result.cg_iterations,
        "residual_history": result.residual_history,
        "l2_norm": problem.space.norm(&result.u),
    }))
}

fn run_optimality(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let alpha = config.problem.alpha.unwrap_or(1.0);
    let n_grid = config.n_grid.clone().unwrap_or_default();
    let replications = config.replications.unwrap_or(1);
    let (rows, errors) =
        optimality_tail_table(alpha, &n_grid, replications, config.seed, &config.optimality.multipliers)
            .map_err(config_err)?;
    let mut records = Vec::new();
    for (i, (&n, errs)) in n_grid.iter().zip(&errors).enumerate() {
        let seed = derive_seed(config.seed, &[i as u64, n as u64]);
        records.extend(errs.iter().enumerate().map(|(r, &error)| ReplicationRecord {
            n,
            replication: r + 1,
            seed,
            error,
            kkt_residual: 0.0,
            iterations: 0,
            gradient_deviation: None,
        }));
    }
    let digest = json_digest(&(&config.kind, alpha, &config.optimality)).map_err(config_err)?;
    let report = TailExperimentReport::build(&n_grid, replications, config.seed, digest, records).map_err(config_err)?;
    out.write_with("errors.csv", |w| report.write_errors_csv(w))?;
    Ok(json!({
        "alpha": alpha,
        "tau_sq": optimality_tau_sq(),
        "gap_constant": optimality_gap_constant(),
        "exponent_ratio": tail_exponent_ratio(alpha),
        "tail_table": rows,
        "all_within_3se": rows.iter().all(|r| r.matches_exact()),
        "bound_dominates": rows.iter().all(|r| r.bound_dominates()),
        "report": report,
    }))
}

fn run_lognormal(config: &ExperimentConfig) -> Result<Value, CliError> {
    let alpha = config.problem.alpha.unwrap_or(1e-3);
    let l = &config.lognormal;
    let spec = LognormalDemoSpec {
        alpha,
        tau_grid: l.tau_grid.clone(),
        sample_counts: l.sample_counts.clone(),
        seed: config.seed,
        contrast: l.contrast.clone(),
    };
    let report = lognormal_violation_evidence(&spec).map_err(config_err)?;
    Ok(json!({
        "report": report,
        "threshold_grid_points": l.threshold_points,
        "threshold_violations": lognormal_threshold_violations(alpha, l.threshold_points, l.threshold_width),
    }))
}

fn run_dimension(config: &ExperimentConfig) -> Result<Value, CliError> {
    let d = &config.dimension;
    let n_grid = config.n_grid.clone().unwrap_or_default();
    let finite = dimension_demo_finite(d.n_dim, d.sigma_sq, d.eps, &n_grid, d.trials, config.seed).map_err(config_err)?;
    let mean_square =
        gaussian_mean_square_norm(d.n_dim, d.sigma_sq, d.trials, derive_seed(config.seed, &[1])).map_err(config_err)?;
    let infinite = dimension_demo_infinite(
        d.k_trunc,
        d.variance_constant,
        d.eps_infinite,
        d.delta,
        d.trials_infinite,
        derive_seed(config.seed, &[2]),
    )
    .map_err(config_err)?;
    Ok(json!({
        "finite": finite,
        "mean_square_norm": mean_square,
        "infinite": infinite,
    }))
}

fn run_bounds(config: &ExperimentConfig) -> Result<Value, CliError> {
    let c = &config.concentration;
    let exp_moment = check_exp_moment_inequality(c.s, &c.lambda_grid, c.exp_trials, config.seed).map_err(config_err)?;
    let hilbert = check_hilbert_sum_tail(c.hilbert_dim, c.hilbert_n, c.hilbert_trials, derive_seed(config.seed, &[1]))
        .map_err(config_err)?;
    Ok(json!({
        "exp_moment": exp_moment,
        "exp_moment_violations": exp_moment.violations(),
        "hilbert_sum": hilbert,
        "hilbert_sum_violations": hilbert.violations(),
        "closed_form": {
            "chi2_exp_moment_at_tau_sq": chi2_exp_moment(optimality_tau_sq()).map_err(config_err)?,
            "sample_size_1_1_0.1_0.05": sample_size_for(1.0, 1.0, 0.1, 0.05).map_err(config_err)?,
            "bound_luxemburg_1_1_27": bound_luxemburg(1.0, 1.0, 27),
        },
    }))
}

