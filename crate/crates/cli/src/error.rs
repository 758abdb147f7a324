use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] frobext_core::Error),
    #[error("{0}")]
    Io(String),
}
