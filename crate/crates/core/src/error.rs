use thiserror::Error;

/// Errors raised by the thermodynamic closure, the field operators and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BllError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("thermodynamic stability violated: {0}")]
    Stability(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("compatibility error: {what} (max mismatch {mismatch:.3e})")]
    Compatibility { what: String, mismatch: f64 },

    #[error("degenerate non-local closure: determinant {0:.3e}")]
    DegenerateClosure(f64),

    #[error("solver diverged at step {step} (t = {time:.6}): {reason}")]
    Divergence { step: usize, time: f64, reason: String },

    #[error("time step {dt:.3e} exceeds the stability bound; suggested dt = {suggested:.3e}")]
    CflViolation { dt: f64, suggested: f64 },

    #[error("epsilon = {eps} too large: initial {field} loses positivity (min {min:.3e})")]
    EpsTooLarge { eps: f64, field: &'static str, min: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory alignment error: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BllError {
    fn from(e: std::io::Error) -> Self {
        BllError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BllError>;
