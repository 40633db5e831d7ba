//! P1 state / P0 control finite elements on a structured triangulation of
//! the unit square.

mod assembly;
mod functions;
mod mesh;
mod sparse;

pub use assembly::{
    assemble_control_load, assemble_control_load_full, assemble_interpolated_load, assemble_mass_p0,
    assemble_mass_p1, assemble_mass_p1_full, assemble_stiffness,
};
pub use functions::{ControlSpace, Norms, P0Function, P1Function};
pub use mesh::Mesh2D;
pub use sparse::{solve_spd, BandCholesky, CsrMatrix, SparseSpd, SpdSolver, DIRECT_SOLVE_MAX_DIM};
