use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a command before it reaches a verdict.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("{}: line {line}, column `{column}`: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] dualrisk::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
