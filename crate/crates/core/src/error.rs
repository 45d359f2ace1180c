use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed AT2 content. `line` is 1-based.
    #[error("AT2 parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("AT2 value count mismatch: header declares NPTS={expected}, found {found} values")]
    CountMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("stiffness calibration did not converge after {iterations} iterations (residual {residual:.3e})")]
    Calibration { iterations: usize, residual: f64 },

    /// Newton failed inside one integration step; `trace` holds the residual norm per iteration.
    #[error("step failure at t={time:.6} s after {} Newton iterations", trace.len())]
    StepFailure { time: f64, trace: Vec<f64> },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("integration failure at t={time:.6} s: non-finite state")]
    Integration { time: f64 },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("rollout diverged at step {step}")]
    RolloutDivergence { step: usize },

    #[error("network format error on line {line}: {msg}")]
    Format { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
