//! Error type shared by all modules.

/// Errors produced by construction, quadrature and identity-check routines.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside its documented range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two elements with incompatible dimensions were combined.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A quadrature result failed its internal consistency check
    /// (rule with N nodes vs the enlarged rule).
    #[error("quadrature inconsistency in {context}: relative deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    QuadratureInconsistency {
        context: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    /// A truncated series could not meet its tail bound.
    #[error("series truncation failed: {0}")]
    Truncation(String),

    /// An intermediate value would overflow f64.
    #[error("overflow guard: {0}")]
    Overflow(String),

    /// A requested Fourier mode cannot be resolved on the sampling grid.
    #[error("aliasing: weight {weight} is not resolved by a grid of {grid} points")]
    Aliasing { weight: i64, grid: usize },

    /// Configuration failed validation.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// A pinned golden constant drifted from its frozen value.
    #[error("golden constant `{name}` drifted: measured {measured:.15e}, frozen {frozen:.15e}")]
    GoldenDrift {
        name: &'static str,
        measured: f64,
        frozen: f64,
    },

    /// File or serialization failure in the harness.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
