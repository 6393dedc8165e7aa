use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// An explicit work or size limit would be exceeded.
    #[error("guard `{guard}` exceeded: limit {limit}, requested {requested}")]
    GuardExceeded {
        guard: &'static str,
        limit: u64,
        requested: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("unsupported record schema: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn guard(guard: &'static str, limit: u64, requested: u64) -> Self {
        Error::GuardExceeded {
            guard,
            limit,
            requested,
        }
    }

    /// True for refusals caused by a work guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}
