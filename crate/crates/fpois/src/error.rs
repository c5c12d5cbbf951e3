//! Error types shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),

    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),

    #[error("degree error: {0}")]
    Degree(String),

    #[error("2-form is not closed at lambda order {0}")]
    NotClosed(usize),

    #[error("{0} must vanish at lambda order 0")]
    NonzeroOrderZero(&'static str),

    #[error("operator does not raise lambda order (nonzero part at order {0})")]
    OperatorOrder(usize),

    #[error("zeroth-order 2-form matrix has non-constant determinant; no polynomial inverse")]
    NonConstantDeterminant,

    #[error("zeroth-order 2-form matrix is degenerate")]
    DegenerateForm,

    #[error("function is not basic at lambda order {0}: coefficient depends on fiber coordinates")]
    NotBasic(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
