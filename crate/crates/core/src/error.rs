use std::path::PathBuf;

/// Errors produced by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: lower endpoint must not exceed upper endpoint")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} budget exceeded: {requested} requested, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("root isolation at level {level} found {found} half-trace roots, expected {expected}")]
    IncompleteBands { level: usize, found: usize, expected: u64 },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid_interval",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::IncompleteBands { .. } => "incomplete_bands",
            Error::EstimationFailed(_) => "estimation_failed",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
