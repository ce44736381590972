use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate chart at node {node}: metric determinant {det:e} below threshold {threshold:e}")]
    DegenerateChart { node: usize, det: f64, threshold: f64 },

    #[error("unsupported ambient: {0}")]
    UnsupportedAmbient(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("mesh too coarse: total curvature / 2pi = {value} is not within 0.1 of an integer")]
    MeshTooCoarse { value: f64 },

    #[error("assembly error at node {node}: {reason}")]
    Assembly { node: usize, reason: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
