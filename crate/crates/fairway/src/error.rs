//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("no rows left after applying row filters to `{0}`")]
    EmptyAfterFilter(String),

    #[error("protected attribute `{attribute}`: raw value `{value}` maps to neither group")]
    NonBinaryProtected { attribute: String, value: String },

    #[error("column `{column}` declared numeric but holds `{value}`")]
    InvalidNumeric { column: String, value: String },

    #[error("too few rows: {got} (need at least {need})")]
    TooFewRows { got: usize, need: usize },

    #[error("unknown protected attribute `{0}`")]
    UnknownAttribute(String),

    #[error("protected attribute `{0}` was excluded from this dataset's features")]
    AttributeAbsent(String),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate group for `{attribute}` ({group}): {reason}")]
    DegenerateGroup {
        attribute: String,
        group: String,
        reason: String,
    },

    #[error("configuration space too small: {0}")]
    SpaceTooSmall(String),

    #[error("repeat {repeat}: {source}")]
    Repeat {
        repeat: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code category: 2 config, 3 data, 4 degenerate group.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::SpaceTooSmall(_) => 2,
            Error::DegenerateGroup { .. } => 4,
            Error::Repeat { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
