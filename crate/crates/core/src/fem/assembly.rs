use super::mesh::Mesh2D;
use super::sparse::{CsrMatrix, SparseSpd};
use crate::error::{invalid, Result, SaaError};

/// P1 stiffness matrix `∫ κ ∇φ_i · ∇φ_j` on the free vertices, with `κ`
/// constant per cell. Dirichlet rows and columns are eliminated.
pub fn assemble_stiffness(mesh: &Mesh2D, kappa: &[f64]) -> Result<SparseSpd> {
    if kappa.len() != mesh.num_cells() {
        return Err(SaaError::DimensionMismatch {
            expected: mesh.num_cells(),
            actual: kappa.len(),
        });
    }
    if let Some(c) = kappa.iter().position(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(invalid(format!(
            "diffusion coefficient must be positive, got {} on cell {c}",
            kappa[c]
        )));
    }
    let area = mesh.cell_area();
    let mut triplets = Vec::with_capacity(9 * mesh.num_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let grads = mesh.basis_gradients(c);
        for a in 0..3 {
            let Some(ia) = mesh.free_index(cell[a]) else { continue };
            for b in 0..3 {
                let Some(ib) = mesh.free_index(cell[b]) else { continue };
                let g = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                triplets.push((ia, ib, kappa[c] * area * g));
            }
        }
    }
    let dim = mesh.num_free();
    SparseSpd::new(CsrMatrix::from_triplets(dim, dim, &triplets))
}

/// Consistent P1 mass matrix over all vertices (boundary included).
pub fn assemble_mass_p1_full(mesh: &Mesh2D) -> CsrMatrix {
    let area = mesh.cell_area();
    let mut triplets = Vec::with_capacity(9 * mesh.num_cells());
    for cell in mesh.cells() {
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { 2.0 } else { 1.0 };
                triplets.push((cell[a], cell[b], w * area / 12.0));
            }
        }
    }
    let nv = mesh.num_vertices();
    CsrMatrix::from_triplets(nv, nv, &triplets)
}

/// P1 mass matrix restricted to the free vertices.
pub fn assemble_mass_p1(mesh: &Mesh2D) -> Result<SparseSpd> {
    let area = mesh.cell_area();
    let mut triplets = Vec::with_capacity(9 * mesh.num_cells());
    for cell in mesh.cells() {
        for a in 0..3 {
            let Some(ia) = mesh.free_index(cell[a]) else { continue };
            for b in 0..3 {
                let Some(ib) = mesh.free_index(cell[b]) else { continue };
                let w = if a == b { 2.0 } else { 1.0 };
                triplets.push((ia, ib, w * area / 12.0));
            }
        }
    }
    let dim = mesh.num_free();
    SparseSpd::new(CsrMatrix::from_triplets(dim, dim, &triplets))
}

/// Diagonal of the P0 mass matrix: every entry is the cell area `h²/2`.
pub fn assemble_mass_p0(mesh: &Mesh2D) -> Vec<f64> {
    vec![mesh.cell_area(); mesh.num_cells()]
}

/// Control load `L` with `L[i][c] = ∫_c φ_i = h²/6` for every vertex `i`
/// of cell `c`, over all vertices.
pub fn assemble_control_load_full(mesh: &Mesh2D) -> CsrMatrix {
    let w = mesh.cell_area() / 3.0;
    let mut triplets = Vec::with_capacity(3 * mesh.num_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &v in cell {
            triplets.push((v, c, w));
        }
    }
    CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_cells(), &triplets)
}

/// Control load with Dirichlet rows dropped. The state equation is stored
/// as `A y = L u + g`, which is the weak form `A y + B u = g` with
/// `⟨B u, v⟩ = -⟨u, v⟩`.
pub fn assemble_control_load(mesh: &Mesh2D) -> CsrMatrix {
    let w = mesh.cell_area() / 3.0;
    let mut triplets = Vec::with_capacity(3 * mesh.num_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &v in cell {
            if let Some(i) = mesh.free_index(v) {
                triplets.push((i, c, w));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_free(), mesh.num_cells(), &triplets)
}

/// Load vector `∫ f φ_i` on the free vertices, with `f` replaced by its
/// nodal P1 interpolant.
pub fn assemble_interpolated_load(mesh: &Mesh2D, mass_full: &CsrMatrix, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let nodal = mesh.interpolate(f);
    mesh.restrict_to_free(&mass_full.matvec(&nodal))
}
