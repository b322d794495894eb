use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomials live over different variable lists")]
    AmbientMismatch,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },

    #[error("invalid system: {0}")]
    InvalidSpec(String),

    #[error("basis explosion ({reason}) along chain {chain}")]
    BasisExplosion { reason: String, chain: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("no distribution given for disturbance `{0}`")]
    MissingDisturbance(String),

    #[error("shift schedule for `{name}` has {len} entries but step {step} was requested")]
    ScheduleTooShort { name: String, len: usize, step: usize },

    #[error("non-finite value for moment `{moment}` at step {step}")]
    NonFinite { step: usize, moment: String },

    #[error("inconsistent trigonometric pair ({cos_var}, {sin_var}): cos^2 + sin^2 = {norm}")]
    InconsistentTrigPair { cos_var: String, sin_var: String, norm: f64 },

    #[error("moment `{0}` is not in the basis")]
    MissingMoment(String),

    #[error("operation requires an un-reduced moment system")]
    ReducedSystem,

    #[error("compiled-system format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),

    #[error("steering failed: {0}")]
    Steering(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
