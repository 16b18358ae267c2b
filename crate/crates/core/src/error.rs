use thiserror::Error;

/// Errors raised by scale construction, partitioning and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time scale: {0}")]
    InvalidScale(String),

    #[error("{0} is not a point of the time scale")]
    NotInScale(f64),

    #[error("{0} lies below the minimum of the time scale")]
    BelowMinimum(f64),

    #[error("a must not exceed b (a = {a}, b = {b})")]
    ReversedBounds { a: f64, b: f64 },

    #[error("empty interval: a = b = {0}")]
    EmptyInterval(f64),

    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("tag {tag} is outside [{lo}, {hi}) of the time scale")]
    TagOutsideCell { tag: f64, lo: f64, hi: f64 },

    #[error("function returned a non-finite value at t = {0}")]
    NonFinite(f64),

    #[error("point generator is not strictly increasing after {0}")]
    NonMonotoneGenerator(f64),

    #[error("the scale has a dense run after {0}; full enumeration is impossible")]
    DenseRun(f64),

    #[error("the scale is not isolated on [{0}, inf)")]
    NotIsolated(f64),

    #[error("limit at infinity could not be established: {0}")]
    NoLimit(String),

    #[error("kernel slice at x = {0} vanishes on the requested range")]
    ZeroSlice(f64),

    #[error("index must start at 1, got {0}")]
    ZeroIndex(usize),

    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("operator {name} failed at x = {x}: {reason}")]
    Operator { name: String, x: f64, reason: String },

    #[error("variable {name} is not allowed in {role}")]
    UnexpectedVariable { name: String, role: String },
}

pub type Result<T> = std::result::Result<T, Error>;
