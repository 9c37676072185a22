pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::run;
pub use config::{parse_config, CommandKind, Invocation, RunConfig, Threads};

/// Failure of a CLI invocation, mapped onto a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameter: {0}")]
    Validation(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Numerical(_) => 5,
        }
    }
}
