use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty domain")]
    EmptyDomain,
    #[error("invalid hybrid time domain: {0}")]
    InvalidDomain(String),
    #[error("cannot concatenate onto non-compact signal")]
    NonCompact,
    #[error("truncation bounds outside domain")]
    TruncationOutOfDomain,
    #[error("arc and input domains differ")]
    DomainMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("flow map diverged")]
    FlowMapDiverged,
    #[error("initial pair not in flow set")]
    NotInFlowSet,
    #[error("initial pair not in jump set")]
    NotInJumpSet,
    #[error("jump map returned no successor state")]
    EmptyJumpImage,
    #[error("backward jump map unavailable")]
    BackwardUnavailable,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
