use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SaaError};
use crate::fem::{
    assemble_control_load, assemble_interpolated_load, assemble_mass_p1, assemble_mass_p1_full,
    assemble_stiffness, ControlSpace, CsrMatrix, Mesh2D, SparseSpd, SpdSolver,
};
use crate::linalg::dot;
use crate::stochastic::ParamDistribution;

/// How `κ(x, ξ)` depends on the parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionModel {
    /// `κ = ξ₁` on the whole square.
    Scalar,
    /// `κ = ξ₁` on `x₂ > 1/2` and `κ = ξ₂` on `x₂ < 1/2`.
    TwoBlock,
}

/// Random right-hand side `r(x, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsModel {
    Zero,
    /// `r(x, ξ) = ξ₂ exp(2 x₁) sin(2π x₂)`.
    Separable,
}

/// Closed-form target state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetField {
    /// `y_d = exp(2 x₁) sin(2π x₁) sin(2π x₂) / 6`.
    Standard,
    Zero,
}

impl TargetField {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::Standard => (2.0 * x).exp() * (2.0 * PI * x).sin() * (2.0 * PI * y).sin() / 6.0,
            Self::Zero => 0.0,
        }
    }
}

pub fn separable_rhs_profile(x: f64, y: f64) -> f64 {
    (2.0 * x).exp() * (2.0 * std::f64::consts::PI * y).sin()
}

/// `Ψ(u) = γ ‖u‖_{L¹} + I_{[a, b]}(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regularizer {
    pub gamma: f64,
    /// `None` means unconstrained.
    #[serde(default)]
    pub bounds: Option<[f64; 2]>,
}

impl Regularizer {
    pub fn none() -> Self {
        Self {
            gamma: 0.0,
            bounds: None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.gamma == 0.0 && self.bounds.is_none()
    }
}

/// One instance of the stochastic linear-quadratic control problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqProblemSpec {
    pub n: usize,
    pub alpha: f64,
    pub target: TargetField,
    pub diffusion: DiffusionModel,
    pub rhs: RhsModel,
    pub regularizer: Regularizer,
    pub distribution: ParamDistribution,
}

impl LqProblemSpec {
    /// Scalar truncated-normal diffusion with a uniform random source,
    /// `L¹` penalty and box constraints.
    pub fn example1(n: usize) -> Self {
        Self {
            n,
            alpha: 1e-3,
            target: TargetField::Standard,
            diffusion: DiffusionModel::Scalar,
            rhs: RhsModel::Separable,
            regularizer: Regularizer {
                gamma: 5.5e-4,
                bounds: Some([-1.0, 1.0]),
            },
            distribution: ParamDistribution::Product {
                components: vec![
                    ParamDistribution::TruncatedNormal {
                        lo: 0.5,
                        hi: 3.5,
                        mean: 2.0,
                        sd: 0.25,
                    },
                    ParamDistribution::Uniform { lo: -1.0, hi: 1.0 },
                ],
            },
        }
    }

    /// Two-block diffusion drawn from a `k × k` atom grid, smooth objective.
    pub fn example2(n: usize, atoms_per_axis: usize) -> Self {
        Self {
            n,
            alpha: 1e-4,
            target: TargetField::Standard,
            diffusion: DiffusionModel::TwoBlock,
            rhs: RhsModel::Zero,
            regularizer: Regularizer::none(),
            distribution: ParamDistribution::DiscreteGrid2D {
                lo: [3.0, 0.5],
                hi: [5.0, 2.5],
                k: atoms_per_axis,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("mesh size n must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.regularizer.gamma >= 0.0) {
            return Err(invalid("gamma must be nonnegative"));
        }
        if let Some([a, b]) = self.regularizer.bounds {
            if !(a < b) {
                return Err(invalid(format!("bounds need a < b, got [{a}, {b}]")));
            }
        }
        if self.diffusion == DiffusionModel::TwoBlock && !self.n.is_multiple_of(2) {
            return Err(invalid("two-block diffusion needs an even n"));
        }
        self.distribution.validate()?;
        let needed = match (self.diffusion, self.rhs) {
            (DiffusionModel::TwoBlock, _) | (_, RhsModel::Separable) => 2,
            _ => 1,
        };
        if self.distribution.dim() < needed {
            return Err(invalid(format!(
                "distribution has {} coordinates, model needs {needed}",
                self.distribution.dim()
            )));
        }
        Ok(())
    }
}

/// A prepared problem: mesh, assembled operators and target data.
///
/// The discrete state equation is `A(ξ) y = L u + g(ξ)` on the free
/// vertices, and the tracking term is `½ ‖y - y_d‖²_{L²}` with `y_d` the
/// nodal interpolant of the target.
#[derive(Debug, Clone)]
pub struct LqProblem {
    pub spec: LqProblemSpec,
    pub mesh: Mesh2D,
    pub space: ControlSpace,
    /// Control load, free vertices × cells.
    pub load: CsrMatrix,
    /// P1 mass on the free vertices.
    pub mass: SparseSpd,
    /// `(M y_d)` restricted to the free vertices.
    pub target_load: Vec<f64>,
    /// `‖y_d‖²_{L²}` of the interpolated target.
    pub target_sq: f64,
    /// Load of the deterministic source profile (zero for `RhsModel::Zero`).
    pub rhs_load: Vec<f64>,
}

/// Factorized state operator and source for one parameter value.
#[derive(Debug, Clone)]
pub struct SampleSystem {
    pub solver: SpdSolver,
    pub source: Vec<f64>,
}

impl LqProblem {
    pub fn new(spec: LqProblemSpec) -> Result<Self> {
        spec.validate()?;
        let mesh = Mesh2D::unit_square(spec.n)?;
        let mass_full = assemble_mass_p1_full(&mesh);
        let target_nodal = mesh.interpolate(|x, y| spec.target.eval(x, y));
        let target_full_load = mass_full.matvec(&target_nodal);
        let target_sq = dot(&target_nodal, &target_full_load);
        let target_load = mesh.restrict_to_free(&target_full_load);
        let rhs_load = match spec.rhs {
            RhsModel::Zero => vec![0.0; mesh.num_free()],
            RhsModel::Separable => assemble_interpolated_load(&mesh, &mass_full, separable_rhs_profile),
        };
        Ok(Self {
            space: ControlSpace::of(&mesh),
            load: assemble_control_load(&mesh),
            mass: assemble_mass_p1(&mesh)?,
            target_load,
            target_sq,
            rhs_load,
            mesh,
            spec,
        })
    }

    /// Replaces the target by an arbitrary nodal field (all vertices).
    pub fn with_target_nodal(mut self, nodal: &[f64]) -> Result<Self> {
        if nodal.len() != self.mesh.num_vertices() {
            return Err(SaaError::DimensionMismatch {
                expected: self.mesh.num_vertices(),
                actual: nodal.len(),
            });
        }
        let full = assemble_mass_p1_full(&self.mesh).matvec(nodal);
        self.target_sq = dot(nodal, &full);
        self.target_load = self.mesh.restrict_to_free(&full);
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn control_dim(&self) -> usize {
        self.mesh.num_cells()
    }

    pub fn state_dim(&self) -> usize {
        self.mesh.num_free()
    }

    /// Per-cell diffusion coefficient for parameter `xi`.
    pub fn kappa(&self, xi: &[f64]) -> Vec<f64> {
        match self.spec.diffusion {
            DiffusionModel::Scalar => vec![xi[0]; self.mesh.num_cells()],
            DiffusionModel::TwoBlock => (0..self.mesh.num_cells())
                .map(|c| if self.mesh.centroid(c)[1] > 0.5 { xi[0] } else { xi[1] })
                .collect(),
        }
    }

    pub fn source(&self, xi: &[f64]) -> Vec<f64> {
        match self.spec.rhs {
            RhsModel::Zero => vec![0.0; self.state_dim()],
            RhsModel::Separable => self.rhs_load.iter().map(|g| xi[1] * g).collect(),
        }
    }

    pub fn sample_system(&self, xi: &[f64]) -> Result<SampleSystem> {
        let stiffness = assemble_stiffness(&self.mesh, &self.kappa(xi))?;
        Ok(SampleSystem {
            solver: SpdSolver::new(&stiffness)?,
            source: self.source(xi),
        })
    }

    fn check_control(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.control_dim() {
            return Err(SaaError::DimensionMismatch {
                expected: self.control_dim(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// Discrete `S(u, ξ)`: solves `A(ξ) y = L u + g(ξ)`.
    pub fn solve_state(&self, u: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_control(u)?;
        self.state_with(&self.sample_system(xi)?, u)
    }

    pub(crate) fn state_with(&self, system: &SampleSystem, u: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = self.load.matvec(u);
        for (r, g) in rhs.iter_mut().zip(&system.source) {
            *r += g;
        }
        system.solver.solve(&rhs)
    }

    /// `½ ‖y - y_d‖²` for a state on the free vertices.
    pub fn tracking_value(&self, y: &[f64]) -> f64 {
        let my = self.mass.matvec(y);
        0.5 * (dot(y, &my) - 2.0 * dot(y, &self.target_load) + self.target_sq)
    }

    /// L² Riesz representative of `Lᵀ p`.
    pub(crate) fn load_adjoint(&self, p: &[f64]) -> Vec<f64> {
        let inv_area = 1.0 / self.space.cell_area;
        let mut g = self.load.transpose_matvec(p);
        for v in &mut g {
            *v *= inv_area;
        }
        g
    }

    pub(crate) fn value_with(&self, system: &SampleSystem, u: &[f64]) -> Result<f64> {
        Ok(self.tracking_value(&self.state_with(system, u)?))
    }

    pub(crate) fn gradient_with(&self, system: &SampleSystem, u: &[f64]) -> Result<Vec<f64>> {
        let y = self.state_with(system, u)?;
        let mut adjoint_load = self.mass.matvec(&y);
        for (a, t) in adjoint_load.iter_mut().zip(&self.target_load) {
            *a -= t;
        }
        // A(ξ) is symmetric, so the adjoint reuses the state factorization.
        let p = system.solver.solve(&adjoint_load)?;
        Ok(self.load_adjoint(&p))
    }

    pub(crate) fn hessvec_with(&self, system: &SampleSystem, v: &[f64]) -> Result<Vec<f64>> {
        let y = system.solver.solve(&self.load.matvec(v))?;
        let p = system.solver.solve(&self.mass.matvec(&y))?;
        Ok(self.load_adjoint(&p))
    }

    /// `G₁(u, ξ) = ½ ‖S(u, ξ) - y_d‖²`.
    pub fn sample_value(&self, u: &[f64], xi: &[f64]) -> Result<f64> {
        self.check_control(u)?;
        self.value_with(&self.sample_system(xi)?, u)
    }

    /// `∇_u G₁(u, ξ)` as an L² function (the `α u` term is not included).
    pub fn sample_gradient_smooth(&self, u: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_control(u)?;
        self.gradient_with(&self.sample_system(xi)?, u)
    }

    /// `K(ξ)* K(ξ) v`.
    pub fn sample_hessvec(&self, v: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_control(v)?;
        self.hessvec_with(&self.sample_system(xi)?, v)
    }
}
