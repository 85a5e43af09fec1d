use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QgzError {
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("invalid root of unity: {0}")]
    InvalidRoot(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("zero radicand: {0}")]
    ZeroRadicand(String),
    #[error("limit values do not coincide: {0}")]
    LimitMismatch(String),
    #[error("divergent limit: {0}")]
    Divergent(String),
    #[error("inconsistent pair phases: {0}")]
    GaugeConflict(String),
    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),
}

pub type Result<T> = std::result::Result<T, QgzError>;
