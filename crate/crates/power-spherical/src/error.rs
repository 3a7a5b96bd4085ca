use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A vector that must lie on the unit sphere does not.
    #[error("vector is not unit-norm: |‖x‖ - 1| = {excess:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitNorm { excess: f64, tol: f64 },

    /// Two objects that must share an ambient dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The mode is only defined for concentration kappa > 0.
    #[error("mode is undefined for kappa = 0")]
    UndefinedMode,

    /// An iterative numeric routine ran out of iterations.
    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// The rejection sampler hit its iteration cap without accepting.
    #[error("rejection sampler exceeded {cap} proposals without accepting")]
    RejectionCap { cap: usize },

    /// A CLI argument or config value is unusable (maps to exit code 2).
    #[error("usage error: {0}")]
    Usage(String),

    /// A grid specification string could not be parsed.
    #[error("invalid grid spec `{0}` (expected `A..B x 10^C..D`, e.g. `1..9 x 10^0..5`)")]
    GridSpec(String),

    /// An input data row could not be processed.
    #[error("malformed input row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
