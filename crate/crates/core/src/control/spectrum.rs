use nalgebra::{DMatrix, SymmetricEigen};

use super::objective::SmoothPart;
use crate::error::{invalid, Result};

/// Largest control dimension for which the Hessian is assembled densely.
pub const DENSE_HESSIAN_MAX_DIM: usize = 1024;

/// Eigenvalues are treated as numerically zero below this multiple of the
/// largest one.
const KERNEL_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HessianSpectrum {
    /// Smallest eigenvalue of the full operator.
    pub min: f64,
    /// Smallest eigenvalue on the orthogonal complement of the numerical
    /// kernel of the unshifted operator (plus the shift).
    pub min_nonzero: f64,
    pub max: f64,
    /// Dimension of the numerical kernel of the unshifted operator.
    pub kernel_dim: usize,
    pub dim: usize,
}

/// Spectrum of `∇²F₁ + shift · I`, assembled column by column from
/// Hessian-vector products and diagonalized densely.
///
/// P0 controls outnumber the interior P1 states (`2n²` against `(n-1)²`),
/// so the discrete `∇²F₁` always has a kernel; `min_nonzero` tracks the
/// decay of the spectrum under refinement.
pub fn f1_hessian_spectrum(smooth: &dyn SmoothPart, shift: f64) -> Result<HessianSpectrum> {
    let dim = smooth.space().dim;
    if dim > DENSE_HESSIAN_MAX_DIM {
        return Err(invalid(format!(
            "control dimension {dim} exceeds the dense Hessian budget {DENSE_HESSIAN_MAX_DIM}"
        )));
    }
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        let col = smooth.hessvec(&e)?;
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            h[(i, j)] = v;
        }
    }
    let sym = (&h + h.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    let max = *eig.last().unwrap_or(&0.0);
    let threshold = KERNEL_REL_TOL * max.abs();
    let kernel_dim = eig.iter().filter(|&&l| l <= threshold).count();
    let min_nonzero = eig.get(kernel_dim).copied().unwrap_or(f64::NAN);
    Ok(HessianSpectrum {
        min: eig.first().copied().unwrap_or(f64::NAN) + shift,
        min_nonzero: min_nonzero + shift,
        max: max + shift,
        kernel_dim,
        dim,
    })
}
