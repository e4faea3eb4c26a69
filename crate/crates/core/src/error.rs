use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Accuracy { requested: f64, achieved: f64, value: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("SVD failed to converge after {sweeps} sweeps on a {rows}x{cols} matrix (off-diagonal {off:e})")]
    SvdNoConvergence { rows: usize, cols: usize, sweeps: usize, off: f64 },

    #[error("non-finite value encountered at step {step}")]
    NumericalBlowup { step: usize },

    #[error("lag {lag} outside table depth {depth}")]
    LagOutOfRange { lag: usize, depth: usize },

    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
