use thiserror::Error;

/// Errors produced by the learners, projections and the game harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("unsupported bound specification: {0}")]
    UnsupportedSpec(String),

    /// The adversary already emitted its end-of-sequence marker.
    #[error("loss sequence exhausted")]
    SequenceExhausted,

    /// An adaptive adversary phase did not terminate within its emission cap.
    #[error("adversary {phase} exceeded its cap of {cap} emissions")]
    PhaseCapExceeded { phase: &'static str, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
