use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("sensitive column `{column}` has a single observed value")]
    SingleSensitiveGroup { column: String },
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("length mismatch: {0}")]
    Length(String),
    #[error("non-finite value in term `{term}`")]
    NonFinite { term: String },
    #[error("training diverged at epoch {epoch}: `{term}` is not finite")]
    Diverged { epoch: usize, term: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("split failed: {0}")]
    Split(String),
    #[error("undefined metric: {0}")]
    Undefined(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
