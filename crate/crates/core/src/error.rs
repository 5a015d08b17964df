use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("element is not a unit (valuation {0})")]
    NonUnit(u32),
    #[error("cannot raise precision from {from} to {to} by truncation")]
    PrecisionIncrease { from: u32, to: u32 },
    #[error("p^m = {p}^{m} does not fit the configured word size")]
    PrecisionOverflow { p: u64, m: u32 },
    #[error("not a crystal: determinant vanishes modulo p^{0}")]
    NotACrystal(u32),
    #[error("invalid slope {a}/{b}: numerator and denominator must be coprime, denominator positive")]
    InvalidSlope { a: u64, b: u64 },
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("degree {small} does not divide degree {large}")]
    NotASubfield { small: usize, large: usize },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("solution counts still growing at extension degree {0}")]
    NotStabilized(u32),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
