use std::fmt;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    InvalidArgument(String),
    /// An index or degree fell outside the truncation bounds.
    OutOfRange(String),
    /// A point lies outside the admissible domain (radius >= 1, etc.).
    Domain(String),
    /// A Gram matrix became numerically singular after pruning.
    Conditioning(String),
    /// An iterative computation failed to converge or produced non-finite values.
    Numerical(String),
    /// An interpolation problem has no solution (conflicting data).
    Infeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfRange(msg) => write!(f, "out of range: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Conditioning(msg) => write!(f, "conditioning error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
