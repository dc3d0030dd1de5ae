//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CtError>;

#[derive(Debug, Error)]
pub enum CtError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("background out of range: t = {t}")]
    BackgroundOutOfRange { t: f64 },

    #[error("step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("max steps exceeded at t = {t}")]
    MaxSteps { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("t = {t} outside trajectory range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("s = {s} outside curve domain [{lo}, {hi}]")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("Newton stalled after {iters} iterations (residual {residual:.3e})")]
    NewtonStalled { iters: usize, residual: f64 },

    #[error("non-neutral initial field: |integral of (rho0 - c)| = {excess:.3e}")]
    NonNeutral { excess: f64 },

    #[error("angle undefined: w = 0")]
    AngleUndefined,

    #[error("mismatched grids: {0}")]
    MismatchedGrids(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CtError {
    /// Exit-code class for the CLI: 2 for bad inputs, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CtError::InvalidParams(_)
            | CtError::InvalidInput(_)
            | CtError::MismatchedGrids(_)
            | CtError::Config(_)
            | CtError::Json(_)
            | CtError::Io(_) => 2,
            _ => 3,
        }
    }
}
