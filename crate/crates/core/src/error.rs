use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("dimension n must be at least 1")]
    ZeroDimension,

    #[error("group size {p}^{n} overflows the index range")]
    SizeOverflow { p: u64, n: u32 },

    #[error("index {index} out of range for a group of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("group parameters differ: F_{}^{} vs F_{}^{}", .left.0, .left.1, .right.0, .right.1)]
    ParamsMismatch { left: (u32, u32), right: (u32, u32) },

    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("expectation over an empty set")]
    EmptySet,

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("function is not constant on cosets of W (deviation {0:e})")]
    NotCosetConstant(f64),

    #[error("codimension {ell} exceeds dim(W) = {dim}; raise delta or epsilon, or lower ell")]
    InsufficientDimension { ell: usize, dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain of size {size} exceeds the limit {limit}")]
    DomainTooLarge { size: usize, limit: usize },

    #[error("enumeration of {count} subspaces exceeds the budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
