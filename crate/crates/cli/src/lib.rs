//! Command-line front end for counting-field TEMPO runs: configuration
//! parsing, job orchestration and CSV output.

pub mod config;
pub mod jobs;
pub mod table;

use thiserror::Error;

pub use config::{Params, Point, RawConfig};
pub use jobs::{run_job, Command, JobOutcome};
pub use table::Table;

/// Engine version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration and I/O problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<fcs_tempo::Error> for CliError {
    fn from(e: fcs_tempo::Error) -> Self {
        use fcs_tempo::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Unsupported(_) | E::Refused(_) | E::LagOutOfRange { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Exit status for a completed job: 4 when some sweep rows failed.
pub fn outcome_code(outcome: &JobOutcome) -> i32 {
    if outcome.failed_rows > 0 {
        4
    } else {
        0
    }
}
