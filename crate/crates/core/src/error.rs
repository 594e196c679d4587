use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("scenario generation failed: {0}")]
    ScenarioGeneration(String),

    #[error("non-finite loss at iteration {iteration}: {detail}")]
    NonFiniteLoss { iteration: usize, detail: String },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("invalid config at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("malformed log {path}: {message}")]
    MalformedLog { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
