use thiserror::Error;

/// Errors raised by constructors, steppers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown potential `{0}` (expected `quadratic` or `double_well`)")]
    UnknownPotential(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("regime violated: {condition}")]
    Regime { condition: String },
    #[error("noise covariance is not positive semidefinite (c11={c11}, c12={c12}, c22={c22})")]
    NotPsd { c11: f64, c12: f64, c22: f64 },
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("sample size {size} exceeds the exact assignment cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("sample clouds differ in size ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("map output is not finite")]
    NonFiniteMap,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
