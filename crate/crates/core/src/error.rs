use thiserror::Error;

/// Errors raised by problem construction, generation and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: n = {n} is above the limit of {limit}")]
    Capacity { n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid clause: {0}")]
    Clause(String),

    #[error("duplicate clause at position {index}")]
    DuplicateClause { index: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("state norm {norm_sqr} deviates from 1 by more than {tolerance}")]
    NormViolation { norm_sqr: f64, tolerance: f64 },

    #[error("no soluble instance after {attempts} attempts (ensemble too constrained)")]
    RejectionBudget { attempts: u64 },

    #[error("step cap exceeded: policy allows at most {cap} steps, {requested} requested")]
    StepCap { cap: usize, requested: usize },

    #[error("DIMACS parse error on line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
