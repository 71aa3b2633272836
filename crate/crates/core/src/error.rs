use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlError {
    #[error("no facility serves clients")]
    NoFacility,
    #[error("instance too large for exact oracle ({0} facilities, limit {1})")]
    TooLarge(usize, usize),
    #[error("client subset must be nonempty")]
    EmptyClientSet,
    #[error("accuracy {0} outside (0, 0.1)")]
    EpsOutOfRange(f64),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("missing solution for ring {0}")]
    MissingRing(i64),
    #[error("strict constants are not representable: {0}")]
    StrictInfeasible(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid generator parameters: {0}")]
    BadParams(String),
    #[error("stage assertion failed [{tag}]: {msg}")]
    Assertion { tag: String, msg: String },
}

pub type Result<T> = std::result::Result<T, FlError>;
