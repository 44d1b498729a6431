use alloc::string::String;
use core::fmt;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must agree in shape do not.
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A caller-supplied parameter is out of its domain.
    Parameter(String),
    /// A value violated an algorithm's input contract (e.g. a loss outside `[0, 1]`).
    Contract(String),
    /// A numerical routine could not reach its accuracy target.
    Numerical { what: &'static str, residual: f64 },
    /// The chain does not have a unique stationary distribution.
    NotErgodic,
    /// The instance is too large for an exhaustive computation.
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    /// A multiplicative certificate cannot exist: the reference chain has a
    /// zero where the other chain does not.
    CertificateImpossible { row: usize, col: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { what, expected, found } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Numerical { what, residual } => {
                write!(f, "numerical failure in {what}: residual {residual:e}")
            }
            Error::NotErgodic => write!(f, "chain has no unique stationary distribution"),
            Error::Capacity { what, size, limit } => {
                write!(f, "{what} too large: {size} exceeds limit {limit}")
            }
            Error::CertificateImpossible { row, col } => write!(
                f,
                "no multiplicative certificate: reference entry ({row}, {col}) is zero but the other is not"
            ),
        }
    }
}

impl core::error::Error for Error {}
