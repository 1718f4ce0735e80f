use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while ingesting data or evaluating bounds.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty file: no header or no data rows")]
    EmptyFile,

    #[error("need ≥ 2 annotators, found {found}")]
    TooFewAnnotators { found: usize },

    #[error("need ≥ 2 classes in the label vocabulary, found {found}")]
    TooFewClasses { found: usize },

    #[error("duplicate class identifier {0:?} in vocabulary")]
    DuplicateClass(String),

    #[error("duplicate column {0:?} in header")]
    DuplicateColumn(String),

    #[error("unknown label {label:?} at row {row} (not in the supplied vocabulary)")]
    UnknownLabel { label: String, row: usize },

    #[error("incomplete row {row}: missing value in column {column:?}")]
    IncompleteRow { row: usize, column: String },

    #[error("label index {index} out of range for a vocabulary of {size} classes")]
    LabelOutOfRange { index: usize, size: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no samples (N = 0)")]
    NoSamples,

    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle column required")]
    MissingOracle,

    #[error("model column required")]
    MissingModel,

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
