use thiserror::Error;

use crate::evolution::FlowState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid parity: {0}")]
    InvalidParity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The requested step violates the advective CFL bound.
    #[error("step rejected: dt = {dt:e} exceeds admissible dt = {admissible:e}")]
    StepRejected { dt: f64, admissible: f64 },

    /// Non-finite values appeared; carries the last state that was finite.
    #[error("numerical blow-up at t = {}", .last_valid.t)]
    BlowUp { last_valid: Box<FlowState> },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("config error at line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },

    #[error("config validation: {0}")]
    ConfigValidation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
