//! Dense vector helpers and a matrix-free conjugate gradient.

use crate::error::{Result, SaaError};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` for a symmetric positive definite `A` given only as an
/// operator, starting from `x = 0`. Stops once `‖r‖₂ ≤ rel_tol ‖b‖₂`.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], opts: CgOptions) -> Result<CgOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = opts.rel_tol * b_norm;
    for iteration in 0..opts.max_iter {
        if rr.sqrt() <= target {
            return Ok(CgOutcome {
                x,
                iterations: iteration,
                relative_residual: rr.sqrt() / b_norm,
            });
        }
        let ap = apply(&p)?;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(SaaError::CgBreakdown {
                iteration,
                curvature,
            });
        }
        let step = rr / curvature;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    let relative_residual = rr.sqrt() / b_norm;
    if relative_residual <= opts.rel_tol {
        Ok(CgOutcome {
            x,
            iterations: opts.max_iter,
            relative_residual,
        })
    } else {
        Err(SaaError::CgNotConverged {
            iterations: opts.max_iter,
            relative_residual,
        })
    }
}
