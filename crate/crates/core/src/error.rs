use alloc::string::String;

/// Failures reported by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("step size underflow; last reachable time t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("maximum number of integrator steps exceeded at t = {t}")]
    MaxSteps { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("characteristic field vanishes near t = {t}")]
    FieldVanishes { t: f64 },
    #[error("model {0} has no printed closed-form solution")]
    NoClosedForm(String),
    #[error("cannot parse rational literal {0:?}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
