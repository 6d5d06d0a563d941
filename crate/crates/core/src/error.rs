use thiserror::Error;

/// Errors raised by the discretization, search and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) lies outside the computational domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("normal field is degenerate at ({x}, {y})")]
    DegenerateNormal { x: f64, y: f64 },

    #[error("no interface found along the search line from ({x}, {y})")]
    NoInterfaceFound { x: f64, y: f64 },

    #[error("closest-point search failed after {steps} steps from ({x}, {y})")]
    SearchFailure { x: f64, y: f64, steps: usize },

    #[error("conjugate gradients did not converge: {iterations} iterations, relative residual {residual:e}")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("pseudo-time iteration exceeded {steps} steps (last update {update:e})")]
    MaxStepsExceeded { steps: usize, update: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
