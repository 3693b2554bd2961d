//! Convergence studies and invariant checks for the HDG optimal-control
//! solver, shared by the `hdg` binary and the acceptance tests.

pub mod checks;
pub mod config;
pub mod study;

use hdg_core::HdgError;
use thiserror::Error;

pub use checks::{run_checks, CheckOptions, CheckOutcome};
pub use config::{OutputFormat, ProblemKind, StudyConfig};
pub use study::{format_csv, format_markdown, run_study, solve_level};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("level n={n}, k={k}: {source}")]
    Level {
        n: usize,
        k: usize,
        #[source]
        source: HdgError,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad configuration, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Level {
                source: HdgError::StabilizationInvalid { .. } | HdgError::InvalidArgument(_),
                ..
            } => 2,
            CliError::Level { .. } | CliError::Io(_) => 1,
        }
    }
}
