//! Error type shared by the whole crate.

use core::fmt;

/// Errors raised by group validation, projections and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A group is empty. Carries the 1-based group index.
    EmptyGroup { group: usize },
    /// A group refers to a coordinate outside `[1, d]`.
    IndexOutOfRange { group: usize, index: usize, dim: usize },
    /// A group lists the same coordinate twice.
    DuplicateIndex { group: usize, index: usize },
    /// Vector or operator dimensions do not match.
    DimensionMismatch { expected: usize, actual: usize },
    /// A scalar parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// The design operator is identically zero.
    ZeroOperator,
    /// An iterative routine exhausted its budget before reaching the
    /// requested tolerance. `achieved` is the best residual estimate.
    ToleranceNotReached {
        required: f64,
        achieved: f64,
        iterations: usize,
    },
    /// The projected Newton method could not make progress (singular
    /// partial Hessian or exhausted line search); callers should retry
    /// with the cyclic backend.
    NewtonFallback { iterations: usize },
    /// A non-finite value appeared at the given outer iteration.
    NonFinite { iteration: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyGroup { group } => write!(f, "group {group} is empty"),
            Error::IndexOutOfRange { group, index, dim } => write!(
                f,
                "group {group}: index {index} outside ambient dimension 1..={dim}"
            ),
            Error::DuplicateIndex { group, index } => {
                write!(f, "group {group}: duplicate index {index}")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::ZeroOperator => write!(f, "design operator is zero"),
            Error::ToleranceNotReached {
                required,
                achieved,
                iterations,
            } => write!(
                f,
                "tolerance {required:e} not reached after {iterations} iterations \
                 (best residual {achieved:e})"
            ),
            Error::NewtonFallback { iterations } => write!(
                f,
                "projected Newton stalled after {iterations} iterations; \
                 fall back to cyclic projections"
            ),
            Error::NonFinite { iteration } => {
                write!(f, "non-finite value at outer iteration {iteration}")
            }
        }
    }
}

impl core::error::Error for Error {}
