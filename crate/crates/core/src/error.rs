use std::path::PathBuf;

use thiserror::Error;

use crate::catalog::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input. `line` is 1-based.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("invalid unit catalog: {}", format_violations(.0))]
    InvalidCatalog(Vec<Violation>),

    #[error("duplicate sentence id `{0}`")]
    DuplicateId(String),

    #[error("unsupported index container: {0}")]
    Container(String),

    #[error("concept expansion failed: {0}")]
    Expansion(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(err: serde_json::Error) -> Self {
        Error::Format {
            line: err.line(),
            message: err.to_string(),
        }
    }

    pub(crate) fn json_at(line: usize, err: serde_json::Error) -> Self {
        Error::Format {
            line,
            message: err.to_string(),
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
