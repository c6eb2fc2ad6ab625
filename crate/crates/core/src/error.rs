use thiserror::Error;

/// Errors produced by constructors and operations with explicit contracts.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or vector parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An axis index does not exist for the given dimension.
    #[error("axis index {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    /// Two grids that must be compatible are not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A kernel was evaluated at its singular point.
    #[error("evaluation at the singular point x = y")]
    SingularPoint,

    /// A quadrature did not reach the requested accuracy.
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureAccuracy { achieved: f64, requested: f64 },

    /// An integral diverges for the given parameters.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// A degenerate input makes the requested quantity undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
