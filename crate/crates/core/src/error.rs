use thiserror::Error;

use crate::report::SampleError;
use crate::scalar::{ChartError, EvalError, ParseError};
use crate::tensor::TensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    /// A documented precondition of a construction does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Malformed input data (dimensions, missing entries, constraint violations).
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
