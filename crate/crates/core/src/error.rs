//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed bracket-notation input.
    #[error("tree parse error at byte {offset}: {message}")]
    TreeParse { offset: usize, message: String },

    /// A label violated the tree-label rules (empty, braces, newlines).
    #[error("invalid tree label {0:?}")]
    InvalidLabel(String),

    /// The dummy label `*` occurred in an input tree.
    #[error("tree contains the reserved label \"*\"")]
    ReservedLabel,

    /// Two sequences that must have equal length did not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An out-of-range or inconsistent parameter (maps to a usage error in the CLI).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A rejected input row, reported with its 1-based line number.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    /// Structural problems with an input file (header, shape).
    #[error("malformed input: {0}")]
    Format(String),

    /// A patient id that is not present in the matrix / dataset.
    #[error("unknown patient id {0:?}")]
    UnknownId(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
