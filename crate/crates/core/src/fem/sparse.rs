use crate::error::{invalid, Result, SaaError};
use crate::linalg::{self, CgOptions};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// in the order they are given.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            debug_assert!(r < rows && c < cols);
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in per_row {
            // Stable sort keeps the accumulation order of duplicates fixed.
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == col {
                    sum += row[k].1;
                    k += 1;
                }
                indices.push(col);
                values.push(sum);
            }
            indptr.push(indices.len());
        }
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.rows)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }
}

/// Square matrix known to be symmetric (to `1e-12` relative) and
/// intended to be positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpd {
    matrix: CsrMatrix,
}

impl SparseSpd {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(SaaError::DimensionMismatch {
                expected: matrix.rows(),
                actual: matrix.cols(),
            });
        }
        let scale = matrix.max_abs();
        if matrix.asymmetry() > 1e-12 * scale {
            return Err(invalid("matrix is not symmetric"));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        true
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }
}

/// Dense-band Cholesky factor `A = L Lᵀ`. For the row-major interior
/// numbering of the structured mesh the bandwidth is `n - 1`, and all
/// fill stays inside the band.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    bandwidth: usize,
    /// Row `i` holds `L[i][i - bandwidth ..= i]`, left-padded with zeros.
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &SparseSpd) -> Result<Self> {
        let dim = a.dim();
        let bw = a.matrix().bandwidth();
        let width = bw + 1;
        let mut band = vec![0.0; dim * width];
        for i in 0..dim {
            for (j, v) in a.matrix().row(i) {
                if j <= i {
                    band[i * width + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..dim {
            let first = i.saturating_sub(bw);
            for j in first..=i {
                let start = first.max(j.saturating_sub(bw));
                let mut s = band[i * width + (j + bw - i)];
                for k in start..j {
                    s -= band[i * width + (k + bw - i)] * band[j * width + (k + bw - j)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(SaaError::NotPositiveDefinite { pivot: i, value: s });
                    }
                    band[i * width + bw] = s.sqrt();
                } else {
                    band[i * width + (j + bw - i)] = s / band[j * width + bw];
                }
            }
        }
        Ok(Self {
            dim,
            bandwidth: bw,
            band,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let bw = self.bandwidth;
        let width = bw + 1;
        let mut x = b.to_vec();
        for i in 0..self.dim {
            let first = i.saturating_sub(bw);
            let mut s = x[i];
            for k in first..i {
                s -= self.band[i * width + (k + bw - i)] * x[k];
            }
            x[i] = s / self.band[i * width + bw];
        }
        for i in (0..self.dim).rev() {
            x[i] /= self.band[i * width + bw];
            let xi = x[i];
            let first = i.saturating_sub(bw);
            for k in first..i {
                x[k] -= self.band[i * width + (k + bw - i)] * xi;
            }
        }
        x
    }
}

/// Interior dimensions above this use conjugate gradients instead of a
/// direct factorization.
pub const DIRECT_SOLVE_MAX_DIM: usize = 200_000;

/// A reusable solver for one SPD system. Immutable once built, so it can be
/// shared across threads.
#[derive(Debug, Clone)]
pub enum SpdSolver {
    Cholesky(BandCholesky),
    ConjugateGradient { matrix: SparseSpd, options: CgOptions },
}

impl SpdSolver {
    pub fn new(a: &SparseSpd) -> Result<Self> {
        if a.dim() <= DIRECT_SOLVE_MAX_DIM {
            Self::cholesky(a)
        } else {
            Ok(Self::iterative(a.clone()))
        }
    }

    pub fn cholesky(a: &SparseSpd) -> Result<Self> {
        Ok(Self::Cholesky(BandCholesky::factor(a)?))
    }

    pub fn iterative(a: SparseSpd) -> Self {
        Self::ConjugateGradient {
            matrix: a,
            options: CgOptions {
                rel_tol: 1e-12,
                max_iter: 100_000,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Cholesky(f) => f.dim(),
            Self::ConjugateGradient { matrix, .. } => matrix.dim(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(SaaError::DimensionMismatch {
                expected: self.dim(),
                actual: b.len(),
            });
        }
        match self {
            Self::Cholesky(f) => Ok(f.solve(b)),
            Self::ConjugateGradient { matrix, options } => {
                let out = linalg::conjugate_gradient(|v| Ok(matrix.matvec(v)), b, *options)?;
                Ok(out.x)
            }
        }
    }
}

/// One-shot SPD solve.
pub fn solve_spd(a: &SparseSpd, b: &[f64]) -> Result<Vec<f64>> {
    SpdSolver::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sub};

    fn tridiagonal(n: usize) -> SparseSpd {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSpd::new(CsrMatrix::from_triplets(n, n, &t)).unwrap()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn identity_returns_rhs() {
        let a = SparseSpd::new(CsrMatrix::identity(5)).unwrap();
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(solve_spd(&a, &b).unwrap(), b.to_vec());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = tridiagonal(7);
        assert_eq!(solve_spd(&a, &[0.0; 7]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn cholesky_and_cg_agree() {
        let a = tridiagonal(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let x1 = SpdSolver::cholesky(&a).unwrap().solve(&b).unwrap();
        let x2 = SpdSolver::iterative(a.clone()).solve(&b).unwrap();
        for x in [&x1, &x2] {
            let r = norm2(&sub(&a.matvec(x), &b));
            assert!(r <= 1e-10 * (1.0 + norm2(&b)));
        }
    }

    #[test]
    fn indefinite_matrix_reports_pivot() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        let a = SparseSpd::new(m).unwrap();
        match BandCholesky::factor(&a) {
            Err(SaaError::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 0.5), (1, 1, 1.0)]);
        assert!(SparseSpd::new(m).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = tridiagonal(3);
        assert!(matches!(
            solve_spd(&a, &[1.0, 2.0]),
            Err(SaaError::DimensionMismatch { .. })
        ));
    }
}
