use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("slope fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Core(#[from] regretlab_core::Error),
    #[error("{failed} of {total} audit checks failed")]
    AuditFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for bad input, 2 for numerical failure, 3 for
    /// a failed audit.
    pub fn exit_code(&self) -> i32 {
        use regretlab_core::Error as Core;
        match self {
            AppError::Core(Core::Numerical { .. } | Core::NotErgodic) => 2,
            AppError::Fit(_) => 2,
            AppError::AuditFailed { .. } => 3,
            _ => 1,
        }
    }
}
