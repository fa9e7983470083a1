//! Library-wide error type.

use std::fmt;

use crate::quat::Quaternion;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the calculus, linear algebra and optimization layers.
///
/// Dimension *contract* violations (mismatched shapes handed to pure algebra
/// such as `matmul`) panic instead; `Error` covers conditions that depend on
/// runtime data.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation received a zero operand where a nonzero one is required
    /// (inverse, rotation parameter μ, polar form).
    ZeroOperand { op: &'static str },
    /// Input dimensions inconsistent with the problem being built.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// Singular or numerically rank-deficient matrix; carries the 1-norm
    /// condition estimate when one was computed (`f64::INFINITY` for an
    /// exactly zero pivot).
    Singular { condition: f64 },
    /// A field evaluation produced a non-finite value at the given point.
    NonFiniteEval { point: Vec<Quaternion> },
    /// Optimizer configuration failed validation.
    InvalidConfig { reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroOperand { op } => write!(f, "{op}: zero operand"),
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected dimension {expected}, found {found}"),
            Error::Singular { condition } => {
                write!(f, "singular matrix (condition estimate {condition:.3e})")
            }
            Error::NonFiniteEval { point } => {
                write!(f, "field evaluated to a non-finite value at [")?;
                for (i, q) in point.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{q}")?;
                }
                write!(f, "]")
            }
            Error::InvalidConfig { reason } => write!(f, "invalid configuration: {reason}"),
        }
    }
}

impl std::error::Error for Error {}
