use thiserror::Error;

/// Errors produced by the correlation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is not one (got {trace})")]
    TraceNotOne { trace: f64 },

    #[error("negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("total dimension {dim} exceeds the supported maximum of {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("support violation: relative entropy is infinite")]
    SupportViolation,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("objective returned a non-finite value at {at:?}")]
    NonFiniteObjective { at: Vec<f64> },

    #[error("invalid rank {rank} for total dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("operation requires a two-qubit state, got dims ({0}, {1})")]
    WrongDimensions(usize, usize),

    #[error("ensemble symmetry precondition violated: {0}")]
    SymmetryViolated(String),

    #[error("state file: {0}")]
    StateFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
