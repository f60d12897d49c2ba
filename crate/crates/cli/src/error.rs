use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Engine(#[from] aerocov::Error),

    #[error("{0}")]
    Infeasible(String),

    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub const EXIT_RUNTIME: i32 = 1;
    pub const EXIT_CONFIG: i32 = 2;
    pub const EXIT_INFEASIBLE: i32 = 3;
    pub const EXIT_VALIDATION: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => Self::EXIT_CONFIG,
            CliError::Engine(aerocov::Error::InvalidParameter { .. }) => Self::EXIT_CONFIG,
            CliError::Engine(aerocov::Error::NoFeasiblePoint | aerocov::Error::InfeasibleStart(_)) => {
                Self::EXIT_INFEASIBLE
            }
            CliError::Infeasible(_) => Self::EXIT_INFEASIBLE,
            CliError::Validation { .. } => Self::EXIT_VALIDATION,
            CliError::Engine(_) | CliError::Io { .. } | CliError::Csv(_) => Self::EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
