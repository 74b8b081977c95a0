use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid cover spec: {0}")]
    InvalidCover(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("{0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

