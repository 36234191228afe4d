use thiserror::Error;

/// Errors raised by model construction, iteration and spectral routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A series or iteration did not converge within its term/iteration cap.
    #[error("no convergence after {iterations} iterations (best estimate {best_estimate})")]
    Convergence {
        iterations: usize,
        best_estimate: f64,
    },

    /// A linear system was singular or numerically singular.
    #[error("singular system: {reason} (condition estimate {condition_estimate:e})")]
    Singular {
        reason: String,
        condition_estimate: f64,
    },

    /// The tridiagonal Toeplitz eigenbasis does not exist (τσ = 0).
    #[error("defective Toeplitz matrix (tau*sigma = 0); use the two-diagonal/Jordan path")]
    DefectiveCase,

    /// An eigenvalue equal to one prevents extending a transient eigenvector to the full matrix.
    #[error("eigenvalue {index} equals 1; cannot extend eigenvector to the full matrix")]
    DegenerateExtension { index: usize },

    /// A rate-profile estimate could not be formed.
    #[error("estimation error: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
