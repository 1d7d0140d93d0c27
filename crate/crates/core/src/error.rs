use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("dilation factor is 0 mod {0}")]
    DegenerateDilation(u64),

    #[error("window radius {n} must be below p/2 (p = {p})")]
    WindowTooWide { n: u64, p: u64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("context mismatch: p = {left} vs p = {right}")]
    ContextMismatch { left: u64, right: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("Q is not a subset of A (residue {0} missing)")]
    NotSubset(u64),

    #[error("shell l = {l} has {found} new elements, need {needed}")]
    SparseShell { l: u32, found: usize, needed: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
