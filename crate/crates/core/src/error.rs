use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: parse error at row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{}: invalid manifest or config: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("column `{column}` not found in {}", path.display())]
    MissingColumn { path: PathBuf, column: String },

    #[error("dataset `{0}` is empty after filtering")]
    EmptyDataset(String),

    #[error("dataset `{name}`: {message}")]
    Split { name: String, message: String },

    #[error("domain mismatch between train and test files: {0}")]
    DomainMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature {feature} has index {index} outside its domain of size {cardinality}")]
    OutOfDomain {
        feature: usize,
        index: usize,
        cardinality: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("score at position {0} is NaN")]
    NanScore(usize),
}
