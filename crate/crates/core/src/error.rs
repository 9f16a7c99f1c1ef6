use thiserror::Error;

/// Errors raised anywhere in the model/spectral/bound pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("Hilbert-space dimension {dim} exceeds the configured cap of {cap} (override with {env})")]
    DimensionCap { dim: usize, cap: usize, env: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("series did not converge: {what} (tail norm {tail_norm:e})")]
    Convergence { what: String, tail_norm: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
