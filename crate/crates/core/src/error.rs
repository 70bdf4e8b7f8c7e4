use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("inversion of zero")]
    InversionOfZero,
    #[error("operands belong to different fields (q={left} vs q={right})")]
    MismatchedField { left: u64, right: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate evaluation point {0}")]
    DuplicateEvaluationPoint(u64),
    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),
    #[error("partition does not divide the input: {0}")]
    DivisibilityViolation(String),
    #[error("infeasible partition: Q={q} exceeds N={n}")]
    InfeasiblePartition { q: u64, n: u64 },
    #[error("too few answers: the recovery threshold is {needed}, got {got} distinct points")]
    TooFewAnswers { needed: usize, got: usize },
    #[error("two answers share the evaluation point {0}")]
    DuplicatePoint(u64),

    #[error("no feasible partition for N={n}, ell={ell}")]
    NoFeasiblePartition { n: u64, ell: u64 },
    #[error("rate threshold {0} is not attainable")]
    InfeasibleRateThreshold(String),
    #[error("no r_A satisfies rate threshold {rate} with r_B={r_b}")]
    NoSatisfyingRA { r_b: u64, rate: String },

    #[error("parameter box too large for exhaustive enumeration: {0}")]
    ParameterBoxTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed frame: {0}")]
    Frame(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
