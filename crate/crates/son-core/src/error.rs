use alloc::string::String;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("rank {0} outside the supported range 2..=16")]
    RankOutOfRange(usize),
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded { what: &'static str, size: usize, cap: usize },
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("malformed representation: {0}")]
    MalformedRepresentation(String),
    #[error("verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = core::result::Result<T, Error>;
