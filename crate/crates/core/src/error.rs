use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum IsacError {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no peak found: {0}")]
    NoPeak(&'static str),

    #[error("degenerate configuration: {reason} (condition number {condition:e})")]
    Degenerate { reason: String, condition: f64 },

    #[error("delay of {delay} samples exceeds stream length {len}")]
    OutOfWindow { delay: usize, len: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IsacError> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> IsacError {
    IsacError::Config(msg.into())
}
