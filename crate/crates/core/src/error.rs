use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of definition of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called on input that violates its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("truncation inside corner region: M = {m} must exceed k = {k}")]
    TruncationInsideCorner { m: usize, k: usize },

    #[error("dense solver refuses dimension {dim} (limit {limit})")]
    TooLarge { dim: usize, limit: usize },

    #[error("breakdown in B-orthonormalization: {0}")]
    Breakdown(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("quadrature did not reach tolerance within {0} intervals")]
    Quadrature(usize),

    #[error("no asymptotic regime: {0}")]
    NoAsymptoticRegime(String),

    #[error("bisection predicate not monotone: {0}")]
    NonMonotone(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
