use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] stand_core::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// A malformed cell; `row` is a 1-based line number.
    #[error("line {row}, column `{column}`: {message}")]
    Cell { row: usize, column: String, message: String },
    #[error("format: {0}")]
    Format(String),
    #[error("model file does not match a refit of its training data: {0}")]
    Export(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
