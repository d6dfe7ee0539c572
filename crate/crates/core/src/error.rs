use thiserror::Error;

/// Errors produced by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no cycle")]
    NoCycle,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid basepoint: {0}")]
    InvalidBasepoint(String),
    #[error("budget exceeded: {count} requested, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
