use thiserror::Error;

use crate::space::{InternalSpace, Level};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible spaces: {0}")]
    SpaceMismatch(String),

    #[error("level {level} is not part of the {space} space")]
    UnknownLevel { level: Level, space: InternalSpace },

    #[error("invalid space layout: {0}")]
    InvalidLayout(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("missing field `{0}`")]
    MissingField(&'static str),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("selector out of range: {0}")]
    SelectorOutOfRange(String),

    #[error("mode cutoff {cutoff} is below the required {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("outcome probability {0:e} is too small to post-select on")]
    ZeroProbability(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no parameter set satisfies the constraints: {0}")]
    Infeasible(String),

    #[error("truncation error {error:e} exceeds tolerance {tolerance:e}")]
    Truncation { error: f64, tolerance: f64 },

    #[error("operator is not Hermitian (defect {0:e})")]
    NonHermitian(f64),

    #[error("integrator step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepFailure { t: f64, h: f64 },
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input.
    Input,
    /// A physical precondition of the requested protocol does not hold.
    Physics,
    /// A numerical tolerance could not be met.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::SpaceMismatch(_)
            | Error::UnknownLevel { .. }
            | Error::InvalidLayout(_)
            | Error::InvalidParameter { .. }
            | Error::MissingField(_)
            | Error::IndexOutOfRange { .. } => ErrorClass::Input,
            Error::SelectorOutOfRange(_)
            | Error::CutoffTooSmall { .. }
            | Error::ZeroProbability(_)
            | Error::InvalidState(_)
            | Error::Infeasible(_) => ErrorClass::Physics,
            Error::Truncation { .. } | Error::NonHermitian(_) | Error::StepFailure { .. } => {
                ErrorClass::Numerical
            }
        }
    }
}
