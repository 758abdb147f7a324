use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    Field(String),
    #[error("element does not belong to F_{q}")]
    FieldMismatch { q: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("structural check failed: {0}")]
    Structural(String),
    #[error("subspace is not contained in the ambient space")]
    NotContained,
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("not a regular sequence: {0}")]
    NotRegular(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("invalid bound: {0}")]
    Bound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("descent failure: {0}")]
    Descent(String),
    #[error("lifting failure: {0}")]
    Lift(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
