#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment orchestration: JSON configs, dispatch to the solvers, harness
//! and analytic cases, and the report files.

pub mod config;
pub mod run;

use std::path::Path;

use serde_json::json;

pub use config::{apply_override, ExperimentConfig, ExperimentKind, Scale};
pub use run::{run, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Io { .. } => 4,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            Self::Config(_) => "config",
            Self::Solver(_) => "solver",
            Self::Io { .. } => "io",
        };
        json!({ "error": kind, "exit_code": self.exit_code(), "message": self.to_string() })
    }
}
