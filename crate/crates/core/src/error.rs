use thiserror::Error;

/// Errors produced by the decoding and tuning routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix was singular or numerically rank-deficient.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A root-finding target has no solution in the search range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An exhaustive operation would touch more points than the guard allows.
    #[error("exhaustive guard exceeded: {points} points > {max}")]
    GuardExceeded { points: u128, max: u128 },
}

impl Error {
    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
