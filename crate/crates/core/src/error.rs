use std::io;

use thiserror::Error;

/// Errors produced by the hypercube primitives, oracles, tester and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {coord} out of range for dimension {dim} (coordinates are 1..={dim})")]
    CoordinateOutOfRange { coord: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (valid range {min}..={max})")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("{what} supports dimension at most {max}, got {n}")]
    DimensionTooLarge { what: &'static str, n: usize, max: usize },

    #[error("instance too large for {what}: {detail}")]
    InstanceTooLarge { what: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed truth table: {0}")]
    TruthTableFormat(String),

    #[error("invalid family spec `{spec}`: {reason}")]
    FamilySpec { spec: String, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
