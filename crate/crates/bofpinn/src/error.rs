use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("eigenvalue crossing detected at t = {t:.6} (modes {i} and {j}, gap {gap:.3e})")]
    Crossing { t: f64, i: usize, j: usize, gap: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("training diverged at iteration {iter}: {what}")]
    Diverged { iter: usize, what: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),

    #[error("architecture mismatch: expected {expected}, found {found}")]
    Architecture { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
