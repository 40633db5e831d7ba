#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Sample average approximation (SAA) for strongly convex stochastic
//! programs, instantiated on finite element discretizations of linear
//! quadratic elliptic optimal control problems with random inputs.

pub mod analytic;
pub mod control;
pub mod error;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod solvers;
pub mod stochastic;

pub use error::{Result, SaaError};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
