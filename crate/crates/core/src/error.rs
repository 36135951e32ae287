use thiserror::Error;

/// Errors raised by state construction, collectibility evaluation and the
/// measurement-scheme simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state norm {norm} deviates from 1 by more than {tolerance}")]
    Norm { norm: f64, tolerance: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown named state `{0}`")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("unsupported size: {0}")]
    Size(String),
    #[error("Gram matrix invalid: {0}")]
    Gram(String),
    #[error("collectibility {value} exceeds the bound {bound}")]
    Bound { value: f64, bound: f64 },
    #[error("no optimizer restart converged after {restarts} attempts")]
    Convergence { restarts: usize },
    #[error("grid of {points} points exceeds the budget of {budget}")]
    Scale { points: u128, budget: u128 },
    #[error("counts record has no shots")]
    EmptyCounts,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
