use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MsmError>;

/// Errors raised anywhere in the library.
///
/// Each variant maps onto a coarse [`ErrorCategory`] that the CLI turns into
/// a process exit code.
#[derive(Debug, Error)]
pub enum MsmError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("rank constraint violated: {0}")]
    RankConstraint(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("non-finite value in {component} at iteration {iteration}")]
    NonFinite { iteration: usize, component: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Numerical => 4,
            ErrorCategory::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Data => "data",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Io => "io",
        }
    }
}

impl MsmError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        MsmError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn dimension(
        context: impl Into<String>,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        MsmError::Dimension {
            context: context.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MsmError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            MsmError::Config { .. } | MsmError::RankConstraint(_) => ErrorCategory::Config,
            MsmError::Dimension { .. } | MsmError::Parse { .. } | MsmError::Graph(_) => {
                ErrorCategory::Data
            }
            MsmError::Singular(_) | MsmError::NonFinite { .. } | MsmError::Contract(_) => {
                ErrorCategory::Numerical
            }
            MsmError::Io { .. } | MsmError::Csv { .. } | MsmError::Json { .. } => {
                ErrorCategory::Io
            }
        }
    }
}
