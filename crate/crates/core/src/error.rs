use thiserror::Error;

/// Errors produced by the deadbeat toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Raised by the primal gain algorithm; the dual algorithm handles singular `A`.
    #[error("A is singular (sigma_min / sigma_max = {ratio:e}); use the dual algorithm")]
    SingularA { ratio: f64 },

    #[error("system is not controllable: {0}")]
    Uncontrollable(String),

    #[error("scalar-input algorithm requires m = 1, got m = {0}")]
    UnsupportedInputWidth(usize),

    /// No level of the class hierarchy intersects; the tracker step is undefined.
    #[error("no nonempty class intersection: system is not deadbeat controllable")]
    NotControllable,

    #[error("state outside the system domain: {0}")]
    DomainViolation(String),

    #[error("trajectory diverged at step {0}")]
    DivergedAtStep(usize),

    #[error("closed loop failed the nilpotency check (residual {0:e})")]
    NotNilpotent(f64),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
