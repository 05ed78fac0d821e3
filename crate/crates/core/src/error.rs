use thiserror::Error;

use crate::grid::Node;

/// Errors raised by the geometry pipeline. A residual check that runs and
/// fails is not an error; it is reported through its result type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("integrability error: flatness residual {residual:.3e} exceeds gate {gate:.3e} at node {node}")]
    Integrability { node: Node, residual: f64, gate: f64 },

    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("step-size error: {0}")]
    StepSize(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
