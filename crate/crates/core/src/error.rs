use thiserror::Error;

/// Errors produced by construction and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed its domain check (value included in the message).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two inputs that must agree in length did not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A label fell outside `0..num_classes`.
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    /// Training produced a non-finite loss (learning rate too high).
    #[error("non-finite loss at epoch {epoch}: learning rate too high or data degenerate")]
    NonFiniteLoss { epoch: usize },

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file did not match the documented schema.
    #[error("parse error: {0}")]
    Parse(String),
}
