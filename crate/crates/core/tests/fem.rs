use std::f64::consts::PI;

use saa_core::fem::{
    assemble_interpolated_load, assemble_mass_p1_full, assemble_stiffness, solve_spd, Mesh2D,
};

fn exact(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// L² error of the P1 solution of `-Δy = 2π² sin(πx) sin(πy)` against the
/// exact solution, with the edge-midpoint rule on each triangle.
fn poisson_error(n: usize) -> f64 {
    let mesh = Mesh2D::unit_square(n).unwrap();
    let stiffness = assemble_stiffness(&mesh, &vec![1.0; mesh.num_cells()]).unwrap();
    let mass_full = assemble_mass_p1_full(&mesh);
    let load = assemble_interpolated_load(&mesh, &mass_full, |x, y| 2.0 * PI * PI * exact(x, y));
    let y_free = solve_spd(&stiffness, &load).unwrap();
    let y_h = mesh.extend_by_zero(&y_free);
    let verts = mesh.vertices();
    let mut err2 = 0.0;
    for cell in mesh.cells() {
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let (pa, pb) = (verts[cell[a]], verts[cell[b]]);
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let diff = exact(mid[0], mid[1]) - (y_h[cell[a]] + y_h[cell[b]]) / 2.0;
            err2 += mesh.cell_area() / 3.0 * diff * diff;
        }
    }
    err2.sqrt()
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let ns = [8usize, 16, 32];
    let errs: Vec<f64> = ns.iter().map(|&n| poisson_error(n)).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (1.0 / n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.15, "slope = {slope}, errors = {errs:?}");
}

#[test]
fn stiffness_is_symmetric_and_coercive() {
    let mesh = Mesh2D::unit_square(8).unwrap();
    let kappa: Vec<f64> = (0..mesh.num_cells()).map(|c| 0.5 + (c % 7) as f64).collect();
    let a = assemble_stiffness(&mesh, &kappa).unwrap();
    assert!(a.matrix().asymmetry() <= 1e-14 * a.matrix().max_abs());
    let v: Vec<f64> = (0..a.dim()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
    let av = a.matvec(&v);
    let energy: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
    assert!(energy > 0.0);
}

#[test]
fn assembly_is_deterministic() {
    let mesh = Mesh2D::unit_square(16).unwrap();
    let kappa = vec![2.5; mesh.num_cells()];
    let a = assemble_stiffness(&mesh, &kappa).unwrap();
    let b = assemble_stiffness(&mesh, &kappa).unwrap();
    assert_eq!(a.matrix().values(), b.matrix().values());
}
