use thiserror::Error;

/// Errors raised by the mean library.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} lies outside ({lo}, {hi})")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("capability error: {operation} needs smoothness >= {needed}, pair declares {declared}")]
    Capability {
        operation: &'static str,
        needed: u8,
        declared: u8,
    },

    #[error("vanishing Wronskian at x = {x} (W = {wronskian})")]
    Singularity { x: f64, wronskian: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported for this parameter space: {0}")]
    Unsupported(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("non-finite value {value} at node {node}")]
    Evaluation { node: String, value: f64 },

    #[error("pair is not normalized (g > 0 and f/g strictly monotone required): {0}")]
    Normalization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Evaluation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
