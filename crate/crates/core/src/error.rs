use thiserror::Error;

/// Errors raised by the polynomial, sampling and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree {degree} out of range [{min}, {max}]")]
    DegreeOutOfRange { degree: usize, min: usize, max: usize },

    #[error("index {index} out of range [{min}, {max}]")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("unsupported quadrature node count {0} (expected 1..=64)")]
    UnsupportedNodeCount(usize),

    #[error("interval length must be positive and finite, got {0}")]
    NonPositiveLength(f64),

    #[error("{name} = {value} lies outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("grid too coarse: {steps} steps, need at least {min}")]
    GridTooCoarse { steps: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sub-intervals have unequal lengths ({0} vs {1})")]
    UnequalLengths(f64, f64),

    #[error("covariance factorization failed: smallest eigenvalue {0:e}")]
    Factorization(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
