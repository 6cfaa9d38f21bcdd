use thiserror::Error;

/// Errors produced by the numeric core.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions are incompatible.
    #[error("shape error: {0}")]
    Shape(String),

    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix that must be positive semidefinite has a clearly negative
    /// eigenvalue.
    #[error("not positive semidefinite: min eigenvalue {0}")]
    NotPsd(f64),

    /// A structural configuration (graph, weights, variant wiring) is
    /// rejected before any iteration runs.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterate left the trusted numeric range.
    #[error("numerical blowup at iteration {iteration}: {detail}")]
    Blowup { iteration: u64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
