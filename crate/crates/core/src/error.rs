use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid weight {value} at row {row}: weights must be finite and nonnegative")]
    InvalidWeight { row: usize, value: f64 },

    #[error("invalid fraction {0}: must lie in (0, 1]")]
    InvalidFraction(f64),

    #[error("invalid k = {k} for {d} features")]
    InvalidK { k: usize, d: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("quantile query on an empty sketch")]
    EmptySketch,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}{}: {message}", column.as_ref().map(|c| format!(", column `{c}`")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<String>,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True when the error originates from user-supplied data or arguments
    /// rather than from a failure inside the toolkit.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
