use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("cannot normalize an all-zero matrix")]
    ZeroMatrix,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("feedback frame has {got} bytes, expected {expected}")]
    FrameLength { expected: usize, got: usize },

    #[error("entry {index} is not a one-bit symbol (must be one of ±1±j)")]
    InvalidSymbol { index: usize },

    #[error("recovery produced an all-zero estimate for user {user}")]
    DegenerateResult { user: usize },

    #[error("singular least-squares system")]
    SingularSystem,

    #[error("channel matrix is zero")]
    DegenerateChannel,
}

pub type Result<T> = std::result::Result<T, Error>;
