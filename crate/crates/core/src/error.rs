use thiserror::Error;

use crate::algorithms::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("model evaluation failed at x = {x:?}, theta = {theta:?}: {reason}")]
    Evaluation {
        x: Vec<f64>,
        theta: Vec<f64>,
        reason: String,
    },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid design space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Sobol dimension {requested} exceeds the {max} tabulated dimensions")]
    SobolDimension { requested: usize, max: usize },

    /// Every least-squares start failed. Carries the best iterate seen, if any.
    #[error("least-squares fit failed: {reason}")]
    FitFailed {
        reason: String,
        best: Option<Vec<f64>>,
    },

    #[error("weight LP failed: {0}")]
    Lp(String),

    #[error("global search failed: every candidate point failed to evaluate")]
    GlobalSearch,

    #[error("ODE integration failed at t = {t}: {reason} (last accepted state {state:?})")]
    Integration {
        t: f64,
        state: Vec<f64>,
        reason: String,
    },

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("model parameter '{0}' is missing")]
    MissingParameter(String),

    #[error("model parameter '{name}' is invalid: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// A solver aborted part-way; the iteration trace up to the failure is kept.
    #[error("{source}")]
    Aborted {
        source: Box<Error>,
        history: Vec<IterationRecord>,
    },
}

impl Error {
    pub(crate) fn aborted(self, history: &[IterationRecord]) -> Error {
        match self {
            Error::Aborted { .. } => self,
            other => Error::Aborted {
                source: Box::new(other),
                history: history.to_vec(),
            },
        }
    }

    /// Iteration history attached to an aborted solve, if any.
    pub fn history(&self) -> Option<&[IterationRecord]> {
        match self {
            Error::Aborted { history, .. } => Some(history),
            _ => None,
        }
    }
}
