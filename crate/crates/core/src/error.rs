use thiserror::Error;

use crate::problem::{ParseError, ValidationError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("iterate is not strictly interior at index {0}")]
    NonInterior(usize),

    #[error("condensed Newton matrix is not positive definite")]
    IndefiniteSystem,

    #[error("reduced inactive-set matrix is not positive definite")]
    IndefiniteReduced,

    #[error("Schur-based estimate has a vanishing denominator at index {0}")]
    ZeroDenominator(usize),

    #[error("step left no interior margin in floating point")]
    DegenerateStep,

    #[error("could not reach the initial centrality bound after {0} Newton steps")]
    InitFailure(usize),

    #[error("problem generation failed: {0}")]
    GenerationFailure(String),

    #[error("need at least 3 positive records for a slope fit, got {0}")]
    InsufficientData(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
