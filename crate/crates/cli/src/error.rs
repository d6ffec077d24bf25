use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed image {path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("malformed cost volume {path}: {message}")]
    Volume { path: PathBuf, message: String },
    #[error("config {path} line {line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] lifting_core::Error),
    #[error("{0}")]
    SelftestFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(lifting_core::Error::Diverged { .. }) => 4,
            CliError::SelftestFailed(_) => 1,
            _ => 3,
        }
    }

    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "missing_file",
            CliError::Write { .. } => "output",
            CliError::Image { .. } => "malformed_image",
            CliError::Volume { .. } => "malformed_volume",
            CliError::Config { .. } => "config",
            CliError::Core(lifting_core::Error::Diverged { .. }) => "diverged",
            CliError::Core(_) => "infeasible_config",
            CliError::SelftestFailed(_) => "selftest",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": {
                "class": self.class(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
