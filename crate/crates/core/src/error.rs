use thiserror::Error;

/// Errors raised by the library. Every fallible operation returns this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at row {row}, column {column}")]
    NonFiniteValue {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("negative weight {value} at row {row}")]
    NegativeWeight { row: usize, value: f64 },

    #[error("weights sum to zero")]
    ZeroTotalWeight,

    #[error("operation requires a univariate measure, got dimension {dim}")]
    NotUnivariate { dim: usize },

    #[error("argument {value} outside the open unit interval")]
    OutsideUnitInterval { value: f64 },

    #[error("samples are not aligned: {left} rows vs {right} rows")]
    Misaligned { left: usize, right: usize },

    #[error("atom counts cannot be matched: {0}")]
    CountMismatch(String),

    #[error("optimal plan splits the mass of reference atom {atom}")]
    NonAssignment { atom: usize },

    #[error("precondition not met: {0}")]
    PreconditionUnmet(String),

    #[error("weight function value {value} at rank {index} is negative")]
    NegativeWeightFunction { index: usize, value: f64 },

    #[error("means differ by {gap:e}")]
    MeanMismatch { gap: f64 },

    #[error("invalid transfer: {0}")]
    InvalidTransfer(String),

    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transport solver failed: {0}")]
    SolverFailure(String),

    #[error("entropic solver did not converge after {iterations} iterations (marginal violation {violation:e})")]
    NonConvergence { iterations: usize, violation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
