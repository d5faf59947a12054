use std::path::PathBuf;

use discrim_core::IterationRecord;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
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

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A config value failed validation; `field` is its dotted path.
    #[error("invalid value for `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("unknown algorithm '{0}' (expected 2adapt, disc or vdm)")]
    UnknownAlgorithm(String),

    #[error("no algorithms given")]
    NoAlgorithms,

    #[error(transparent)]
    Solver(#[from] discrim_core::Error),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Iteration history of a solver that aborted part-way.
    pub fn history(&self) -> Option<&[IterationRecord]> {
        match self {
            CliError::Solver(e) => e.history(),
            _ => None,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
