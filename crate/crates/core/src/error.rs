use thiserror::Error;

/// Errors raised by the simulator, the analytic routines and the trainer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock cutoff {0}: a qumode needs at least two levels")]
    InvalidCutoff(usize),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("truncation leakage {leakage:.3e} exceeds {tolerance:.1e} at cutoff {cutoff}")]
    Leakage {
        leakage: f64,
        tolerance: f64,
        cutoff: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge: node doubling moved the result by {0:.3e}")]
    Precision(f64),

    #[error("transform error: {0}")]
    Transform(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("optimization failed in all {restarts} restarts")]
    OptimizationFailure {
        restarts: usize,
        traces: Vec<Vec<f64>>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
