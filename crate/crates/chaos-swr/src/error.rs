//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix construction, sampling, enumeration and the
/// bound/report machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input matrix is not square: row {row} has {got} columns, expected {expected}")]
    NonSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix dimension must be at least 2, got {0}")]
    MatrixTooSmall(usize),
    #[error("nonzero diagonal entry {value} at index {index} rejected in strict mode")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("expected an even positive length, got {0}")]
    OddLength(usize),
    #[error("sign vector has {got} entries, matrix expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {value} at index {index} is not a sign (+1 or -1)")]
    NotASign { index: usize, value: i8 },
    #[error("sign vector is not balanced: sum of signs is {sum}, expected 0")]
    Unbalanced { sum: i64 },
    #[error("delta {delta} out of range [0, {n}]")]
    DeltaOutOfRange { delta: usize, n: usize },
    #[error("x must be strictly positive, got {0}")]
    NonpositiveX(f64),
    #[error("enumeration needs {needed} outcomes, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("quantile level must lie in (0, 1), got {0}")]
    InvalidQuantile(f64),
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("x grid must be nonempty")]
    EmptyGrid,
    #[error("calibration instance list must be nonempty")]
    NoInstances,
    #[error("calibration instance {index} has sigma = 0")]
    SigmaZero { index: usize },
    #[error("constant must be strictly positive: {name} = {value}")]
    NonpositiveConstant { name: &'static str, value: f64 },
    #[error("gaussian kernel bandwidth must be strictly positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("tabulated kernel is {got}x{got} but the dataset has n = {expected}")]
    KernelSizeMismatch { expected: usize, got: usize },
    #[error("unequal sample sizes: sample 1 has {first}, sample 2 has {second}")]
    UnequalSampleSizes { first: usize, second: usize },
    #[error("unknown sample label {0:?} (expected \"1\" or \"2\")")]
    UnknownLabel(String),
    #[error("dataset rows have inconsistent dimension: expected {expected}, got {got}")]
    InconsistentDimension { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("unknown ensemble {0:?}")]
    UnknownEnsemble(String),
    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
