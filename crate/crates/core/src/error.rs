use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("conditioning on an event with zero probability: {0}")]
    NullCondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("masses must be non-negative and sum to 1 (sum = {sum})")]
    Normalization { sum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("times must be ordered: t_end = {end} must exceed t_start = {start}")]
    TimeOrdering { start: f64, end: f64 },

    #[error("propagator is not invertible (smallest pivot ratio {pivot_ratio:.3e})")]
    SingularPropagator { pivot_ratio: f64 },

    #[error("unstable explicit step: D*dt/dx^2 = {ratio:.4} > 0.5; use dt <= {suggested_dt:.6e} (at least {suggested_steps} steps)")]
    Unstable {
        ratio: f64,
        suggested_dt: f64,
        suggested_steps: usize,
    },

    #[error("model error: {0}")]
    Model(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("document `{0}` has no positive term counts")]
    EmptyDocument(String),

    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
