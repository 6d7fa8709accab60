use thiserror::Error;

/// Errors raised by the cube, torus and inequality evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} out of range (expected 1..={1})")]
    DimensionOutOfRange(usize, usize),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("coordinate {coord} out of range for dimension {n}")]
    CoordinateOutOfRange { coord: usize, n: usize },

    #[error("subset {mask:#b} is not contained in a {n}-element ground set")]
    SubsetOutOfRange { mask: u64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input is not mean-zero (mean = {0:e})")]
    NotMeanZero(f64),

    #[error("work {work} exceeds budget {budget}")]
    BudgetExceeded { work: u128, budget: u128 },

    #[error("operation requires a dense torus function")]
    OracleBacking,

    #[error("quadrature unresolved: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureUnresolved { estimate: f64, tolerance: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
