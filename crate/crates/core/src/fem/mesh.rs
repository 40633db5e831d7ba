use crate::error::{invalid, Result};

/// Structured right-triangle mesh of the unit square.
///
/// Vertices are numbered row-major, `v = i + j (n + 1)` for the point
/// `(i h, j h)`. Every grid square `(i, j)` is split along its lower-left
/// to upper-right diagonal into a lower triangle (cell `2 (i + j n)`) and an
/// upper triangle (cell `2 (i + j n) + 1`), both oriented counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    n: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    /// Position of each vertex among the free (interior) vertices.
    free_index: Vec<Option<usize>>,
    free_vertices: Vec<usize>,
}

impl Mesh2D {
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("mesh needs at least one cell per axis"));
        }
        let side = n + 1;
        let mut vertices = Vec::with_capacity(side * side);
        let mut boundary = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = i + j * side;
                let v10 = v00 + 1;
                let v01 = v00 + side;
                let v11 = v01 + 1;
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }
        let mut free_index = vec![None; boundary.len()];
        let mut free_vertices = Vec::new();
        for (v, &on_boundary) in boundary.iter().enumerate() {
            if !on_boundary {
                free_index[v] = Some(free_vertices.len());
                free_vertices.push(v);
            }
        }
        Ok(Self {
            n,
            vertices,
            cells,
            boundary,
            free_index,
            free_vertices,
        })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Area of every cell, `h²/2`.
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        0.5 * h * h
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of interior (Dirichlet-free) vertices, `(n - 1)²`.
    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }

    pub fn free_index(&self, vertex: usize) -> Option<usize> {
        self.free_index[vertex]
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free_vertices
    }

    pub fn signed_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cells[cell];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn centroid(&self, cell: usize) -> [f64; 2] {
        let [a, b, c] = self.cells[cell];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    /// Gradients of the three barycentric basis functions on `cell`.
    pub(crate) fn basis_gradients(&self, cell: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.cells[cell];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let twice_area = 2.0 * self.signed_area(cell);
        [
            [(pb[1] - pc[1]) / twice_area, (pc[0] - pb[0]) / twice_area],
            [(pc[1] - pa[1]) / twice_area, (pa[0] - pc[0]) / twice_area],
            [(pa[1] - pb[1]) / twice_area, (pb[0] - pa[0]) / twice_area],
        ]
    }

    /// Nodal interpolant of `f` at every vertex.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.vertices.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Restricts a full vertex vector to the free vertices.
    pub fn restrict_to_free(&self, full: &[f64]) -> Vec<f64> {
        self.free_vertices.iter().map(|&v| full[v]).collect()
    }

    /// Extends a free-vertex vector by zero boundary values.
    pub fn extend_by_zero(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_vertices()];
        for (k, &v) in self.free_vertices.iter().enumerate() {
            full[v] = free[k];
        }
        full
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_mesh() {
        assert!(Mesh2D::unit_square(0).is_err());
    }

    #[test]
    fn counts_for_small_meshes() {
        let m1 = Mesh2D::unit_square(1).unwrap();
        assert_eq!((m1.num_vertices(), m1.num_cells(), m1.num_free()), (4, 2, 0));
        let m2 = Mesh2D::unit_square(2).unwrap();
        assert_eq!((m2.num_vertices(), m2.num_cells(), m2.num_free()), (9, 8, 1));
        assert_eq!(m2.free_vertices(), &[4]);
    }

    #[test]
    fn fine_mesh_control_dimension() {
        let m = Mesh2D::unit_square(256).unwrap();
        assert_eq!(m.num_cells(), 131_072);
        assert_eq!(m.num_vertices(), 257 * 257);
    }

    #[test]
    fn cells_are_positively_oriented_with_equal_area() {
        for n in [1, 3, 8] {
            let m = Mesh2D::unit_square(n).unwrap();
            let h = 1.0 / n as f64;
            for c in 0..m.num_cells() {
                assert!((m.signed_area(c) - 0.5 * h * h).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn boundary_flags_match_coordinates() {
        let m = Mesh2D::unit_square(5).unwrap();
        for (p, &flag) in m.vertices().iter().zip(m.boundary_mask()) {
            let on = p[0] == 0.0 || p[1] == 0.0 || p[0] == 1.0 || p[1] == 1.0;
            assert_eq!(on, flag);
        }
    }

    #[test]
    fn basis_gradients_sum_to_zero() {
        let m = Mesh2D::unit_square(3).unwrap();
        for c in 0..m.num_cells() {
            let g = m.basis_gradients(c);
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-12);
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-12);
        }
    }
}
