use thiserror::Error;

use crate::backward::History;

pub type Result<T> = std::result::Result<T, Error>;

/// Best estimate available when a sequential estimator ran out of replicas.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PartialEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicas: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("replica budget exhausted: {reason} (partial estimate {partial:?})")]
    BudgetExceeded {
        reason: String,
        partial: Option<PartialEstimate>,
    },

    /// A backward history grew past its length cap. The partial history is
    /// kept so callers can inspect how far the exploration got.
    #[error("history exceeded length cap {cap} (explored length {explored}); beta is likely supercritical")]
    Supercritical {
        cap: f64,
        explored: f64,
        partial: Option<Box<History>>,
    },

    #[error("history does not match update sequence: {0}")]
    Integrity(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::InvalidGraph(_) => 2,
            Error::Capacity(_) => 3,
            Error::BudgetExceeded { .. } => 4,
            Error::Supercritical { .. } => 5,
            Error::Integrity(_) => 6,
        }
    }

    /// Short machine-readable tag for error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGraph(_) => "invalid-graph",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Capacity(_) => "capacity",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::Supercritical { .. } => "supercritical",
            Error::Integrity(_) => "integrity",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Io(_) => "io",
        }
    }

    /// JSON payload describing the error, for machine consumers.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            Error::BudgetExceeded {
                partial: Some(p), ..
            } => {
                v["partial"] = serde_json::to_value(p).unwrap_or_default();
            }
            Error::Supercritical { cap, explored, .. } => {
                v["cap"] = (*cap).into();
                v["explored"] = (*explored).into();
            }
            _ => {}
        }
        v
    }
}
