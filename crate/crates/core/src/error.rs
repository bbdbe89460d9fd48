use thiserror::Error;

/// Errors raised by the vortex library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// `1 - λ|f|²` vanished, the holomorphic map left the target surface.
    #[error("surface singularity at z = {re}{im:+}i: 1 - λ|f|² = {value:e}")]
    SurfaceSingularity { re: f64, im: f64, value: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no vacuum: {0}")]
    NoVacuum(String),

    #[error("problem specification: {0}")]
    Spec(String),

    #[error("newton iteration diverged after {iterations} iterations: {reason}")]
    Divergence {
        iterations: usize,
        reason: String,
        history: Vec<f64>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for VortexError {
    fn from(e: std::io::Error) -> Self {
        VortexError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VortexError>;
