use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("{value} is not in H_{p} (denominator must be a power of {p})")]
    NotInHp { value: String, p: u64 },
    #[error("slope {0} is outside the slope group")]
    SlopeNotInGroup(String),
    #[error("slope groups differ")]
    GroupMismatch,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("domains differ")]
    DomainMismatch,
    #[error("{0} lies outside the domain")]
    OutsideDomain(String),
    #[error("germ undefined at the domain boundary {0}")]
    BoundaryGerm(String),
    #[error("kinks must be strictly increasing and interior: {0}")]
    BadKinks(String),
    #[error("expected {expected} slopes, got {got}")]
    SlopeCount { expected: usize, got: usize },
    #[error("function is not convex")]
    NotConvex,
    #[error("closure fails: the slopes integrate to {0} over one period")]
    Closure(String),
    #[error("operation undefined on the bottom function")]
    Bottom,
    #[error("point must be positive, got {0}")]
    NonPositivePoint(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}
