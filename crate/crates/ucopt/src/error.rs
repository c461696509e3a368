use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A size guard on an exhaustive routine was exceeded.
    #[error("capacity exceeded: {what} supports at most {limit}, got {got}")]
    CapacityExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// A solve finished without producing a feasible outcome.
    #[error("infeasible outcome: {0}")]
    Infeasible(String),

    #[error("numerical failure: {message} (residual {residual:.3e})")]
    NumericalFailure { message: String, residual: f64 },

    /// The remote endpoint could not be reached or the connection broke.
    #[error("transport error: {0}")]
    Transport(String),

    /// The remote endpoint answered but rejected or failed the job.
    #[error("remote error: {0}")]
    Remote(String),

    /// A remote answer did not survive local re-verification.
    #[error("integrity error: sample {sample_index} reports energy {reported}, local re-evaluation gives {recomputed}")]
    Integrity {
        sample_index: usize,
        reported: f64,
        recomputed: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
