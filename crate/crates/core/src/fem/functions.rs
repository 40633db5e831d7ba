use serde::{Deserialize, Serialize};

use super::mesh::Mesh2D;
use crate::error::{Result, SaaError};

/// Piecewise constant function, one coefficient per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P0Function {
    pub n: usize,
    pub values: Vec<f64>,
}

/// Continuous piecewise linear function stored on the free vertices; the
/// boundary values are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Function {
    pub n: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub l1: f64,
}

impl P0Function {
    pub fn new(mesh: &Mesh2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_cells() {
            return Err(SaaError::DimensionMismatch {
                expected: mesh.num_cells(),
                actual: values.len(),
            });
        }
        Ok(Self { n: mesh.n(), values })
    }

    pub fn constant(mesh: &Mesh2D, value: f64) -> Self {
        Self {
            n: mesh.n(),
            values: vec![value; mesh.num_cells()],
        }
    }

    pub fn zeros(mesh: &Mesh2D) -> Self {
        Self::constant(mesh, 0.0)
    }

    fn cell_area(&self) -> f64 {
        let h = 1.0 / self.n as f64;
        0.5 * h * h
    }

    pub fn norms(&self) -> Norms {
        let area = self.cell_area();
        Norms {
            l2: (area * self.values.iter().map(|u| u * u).sum::<f64>()).sqrt(),
            l1: area * self.values.iter().map(|u| u.abs()).sum::<f64>(),
        }
    }

    pub fn inner_l2(&self, other: &Self) -> Result<f64> {
        if self.n != other.n || self.values.len() != other.values.len() {
            return Err(SaaError::DimensionMismatch {
                expected: self.values.len(),
                actual: other.values.len(),
            });
        }
        Ok(self.cell_area() * crate::linalg::dot(&self.values, &other.values))
    }
}

impl P1Function {
    pub fn new(mesh: &Mesh2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_free() {
            return Err(SaaError::DimensionMismatch {
                expected: mesh.num_free(),
                actual: values.len(),
            });
        }
        Ok(Self { n: mesh.n(), values })
    }
}

/// L² geometry of the P0 control space on a uniform mesh. All cells have
/// the same area, so the mass matrix is `cell_area · I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpace {
    pub dim: usize,
    pub cell_area: f64,
}

impl ControlSpace {
    pub fn of(mesh: &Mesh2D) -> Self {
        Self {
            dim: mesh.num_cells(),
            cell_area: mesh.cell_area(),
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.cell_area * crate::linalg::dot(u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    pub fn distance(&self, u: &[f64], v: &[f64]) -> f64 {
        let s: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        (self.cell_area * s).sqrt()
    }
}
