use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CtError>;

#[derive(Debug, Error)]
pub enum CtError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("index out of range: {what} = {index}, valid range {lo}..={hi}")]
    Index {
        what: &'static str,
        index: i64,
        lo: i64,
        hi: i64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape support escapes B_R(0) with R = {radius}: {detail}")]
    SupportViolation { radius: f64, detail: String },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("bad file format in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("config error in field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CtError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CtError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        CtError::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
