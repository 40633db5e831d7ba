use thiserror::Error;

/// Errors raised anywhere in the SAA pipeline.
#[derive(Debug, Error)]
pub enum SaaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite (breakdown at pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("conjugate gradient breakdown at iteration {iteration} (curvature {curvature:e})")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {relative_residual:e})")]
    CgNotConverged {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("{method} did not converge in {iterations} iterations; residual history {history:?}")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("replication failed at N = {n}, r = {replication}: {source}")]
    Replication {
        n: usize,
        replication: usize,
        #[source]
        source: Box<SaaError>,
    },
}

pub type Result<T> = std::result::Result<T, SaaError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SaaError {
    SaaError::InvalidArgument(msg.into())
}
