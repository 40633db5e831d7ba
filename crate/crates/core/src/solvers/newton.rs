use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::prox::ProxSpec;
use crate::control::SmoothPart;
use crate::error::{invalid, Result, SaaError};
use crate::linalg::{conjugate_gradient, CgOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop once the L² norm of the optimality residual is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the inner CG solves (semismooth Newton).
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
    /// Maximum number of step halvings per outer iteration.
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            cg_rel_tol: 1e-12,
            cg_max_iter: 5000,
            max_halvings: 30,
        }
    }
}

/// Outcome of one SAA (or reference) solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaResult {
    pub u: Vec<f64>,
    /// L² norm of the optimality residual at `u`.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub wall_time_secs: f64,
    pub seed: Option<u64>,
    pub n_samples: usize,
    pub residual_history: Vec<f64>,
}

/// `R(q) = q + ∇F₁(prox(q))`, the normal-map residual. Its zeros `q*` give
/// the minimizer `u* = prox(q*)`.
pub fn normal_map_residual(smooth: &dyn SmoothPart, spec: &ProxSpec, q: &[f64]) -> Result<Vec<f64>> {
    let u = super::prox::prox(q, spec);
    let mut r = smooth.gradient(&u)?;
    for (ri, qi) in r.iter_mut().zip(q) {
        *ri += qi;
    }
    Ok(r)
}

struct NormalMapPoint {
    q: Vec<f64>,
    u: Vec<f64>,
    residual: Vec<f64>,
    norm: f64,
}

fn evaluate(smooth: &dyn SmoothPart, spec: &ProxSpec, q: Vec<f64>) -> Result<NormalMapPoint> {
    let u = super::prox::prox(&q, spec);
    let mut residual = smooth.gradient(&u)?;
    for (ri, qi) in residual.iter_mut().zip(&q) {
        *ri += qi;
    }
    let norm = smooth.space().norm(&residual);
    Ok(NormalMapPoint { q, u, residual, norm })
}

/// Semismooth Newton on the normal map for
/// `min F₁(u) + (α/2)‖u‖² + γ‖u‖_{L¹} + I_{[a, b]}(u)`, started at `q = 0`.
///
/// Each step solves `(αI + H_II) δu_I = -R_I` on the inactive set by CG and
/// sets `δq_I = α δu_I`, `δq_A = -R_A - (H δu)_A`; the step is halved until
/// the residual norm decreases.
pub fn semismooth_newton(smooth: &dyn SmoothPart, spec: &ProxSpec, opts: &SolverOptions) -> Result<SaaResult> {
    let start = Instant::now();
    let dim = smooth.space().dim;
    let mut point = evaluate(smooth, spec, vec![0.0; dim])?;
    let mut history = vec![point.norm];
    let mut cg_total = 0;
    let mut iterations = 0;
    while point.norm > opts.tol {
        if iterations == opts.max_iter {
            return Err(SaaError::NotConverged {
                method: "semismooth Newton",
                iterations,
                history,
            });
        }
        iterations += 1;

        let inactive: Vec<usize> = (0..dim).filter(|&i| spec.is_inactive(point.q[i])).collect();
        let mut du = vec![0.0; dim];
        if !inactive.is_empty() {
            let rhs: Vec<f64> = inactive.iter().map(|&i| -point.residual[i]).collect();
            let apply = |v: &[f64]| -> Result<Vec<f64>> {
                let mut full = vec![0.0; dim];
                for (&i, &vi) in inactive.iter().zip(v) {
                    full[i] = vi;
                }
                let hv = smooth.hessvec(&full)?;
                Ok(inactive.iter().zip(v).map(|(&i, &vi)| spec.alpha * vi + hv[i]).collect())
            };
            let cg_opts = CgOptions {
                rel_tol: opts.cg_rel_tol,
                max_iter: opts.cg_max_iter,
            };
            let out = conjugate_gradient(apply, &rhs, cg_opts)?;
            cg_total += out.iterations;
            for (&i, &xi) in inactive.iter().zip(&out.x) {
                du[i] = xi;
            }
        }
        let hdu = smooth.hessvec(&du)?;
        let mut dq: Vec<f64> = (0..dim).map(|i| -point.residual[i] - hdu[i]).collect();
        for &i in &inactive {
            dq[i] = spec.alpha * du[i];
        }

        let mut step = 1.0;
        let mut accepted = None;
        let mut first_trial = None;
        for _ in 0..=opts.max_halvings {
            let trial_q: Vec<f64> = point.q.iter().zip(&dq).map(|(q, d)| q + step * d).collect();
            let trial = evaluate(smooth, spec, trial_q)?;
            if trial.norm < point.norm {
                accepted = Some(trial);
                break;
            }
            if first_trial.is_none() {
                first_trial = Some(trial);
            }
            step *= 0.5;
        }
        // No decrease along the direction: take the full step anyway and let
        // the iteration cap decide.
        point = accepted.or(first_trial).expect("at least one trial step is evaluated");
        history.push(point.norm);
    }
    Ok(SaaResult {
        u: point.u,
        kkt_residual: point.norm,
        iterations,
        cg_iterations: cg_total,
        wall_time_secs: start.elapsed().as_secs_f64(),
        seed: None,
        n_samples: 0,
        residual_history: history,
    })
}

/// Inexact Newton-CG for the smooth case `min F₁(u) + (α/2)‖u‖²`, started at
/// `u = 0`, forcing term `min(0.5, √‖∇f‖)`.
pub fn newton_cg(smooth: &dyn SmoothPart, alpha: f64, opts: &SolverOptions) -> Result<SaaResult> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    let start = Instant::now();
    let space = smooth.space();
    let dim = space.dim;
    let mut u = vec![0.0; dim];
    let gradient = |u: &[f64]| -> Result<Vec<f64>> {
        let mut g = smooth.gradient(u)?;
        for (gi, ui) in g.iter_mut().zip(u) {
            *gi += alpha * ui;
        }
        Ok(g)
    };
    let mut g = gradient(&u)?;
    let mut norm = space.norm(&g);
    let mut history = vec![norm];
    let mut cg_total = 0;
    let mut iterations = 0;
    while norm > opts.tol {
        if iterations == opts.max_iter {
            return Err(SaaError::NotConverged {
                method: "Newton-CG",
                iterations,
                history,
            });
        }
        iterations += 1;
        let forcing = norm.sqrt().min(0.5);
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let apply = |v: &[f64]| -> Result<Vec<f64>> {
            let mut hv = smooth.hessvec(v)?;
            for (hi, vi) in hv.iter_mut().zip(v) {
                *hi += alpha * vi;
            }
            Ok(hv)
        };
        let cg_opts = CgOptions {
            rel_tol: forcing.max(opts.cg_rel_tol),
            max_iter: opts.cg_max_iter,
        };
        let out = conjugate_gradient(apply, &rhs, cg_opts)?;
        cg_total += out.iterations;
        for (ui, di) in u.iter_mut().zip(&out.x) {
            *ui += di;
        }
        g = gradient(&u)?;
        norm = space.norm(&g);
        history.push(norm);
    }
    Ok(SaaResult {
        u,
        kkt_residual: norm,
        iterations,
        cg_iterations: cg_total,
        wall_time_secs: start.elapsed().as_secs_f64(),
        seed: None,
        n_samples: 0,
        residual_history: history,
    })
}

/// Newton-CG for smooth problems, semismooth Newton otherwise.
pub fn solve(smooth: &dyn SmoothPart, spec: &ProxSpec, opts: &SolverOptions) -> Result<SaaResult> {
    if spec.is_smooth() {
        newton_cg(smooth, spec.alpha, opts)
    } else {
        semismooth_newton(smooth, spec, opts)
    }
}
