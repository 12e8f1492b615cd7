//! Error type shared by all modules of the crate.

/// Crate-wide error type.
///
/// Numerical "negative" outcomes (an invalid map, a violated positivity
/// verdict) are *results*, not errors; errors are reserved for inputs that
/// break an operation's contract or for genuine numerical failure.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("input outside domain: {0}")]
    Domain(String),

    #[error("pole encountered: {0}")]
    Pole(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.6e}, tolerance {tol:.1e})")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("matrix is not positive definite (min eigenvalue {0:.6e})")]
    NotPd(f64),

    #[error("map is not a self-map of the ball: {0}")]
    NotSelfMap(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    /// Floating-point precision ran out mid-sequence. Carries the last
    /// reliable index and everything computed up to it.
    #[error("precision exhausted after iterate {last_n}")]
    PrecisionExhausted { last_n: usize, values: Vec<f64> },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("limit formula requires dilatation coefficient < 1 (map is parabolic)")]
    ParabolicLimit,

    #[error("map failed validation: {0}")]
    InvalidMap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
