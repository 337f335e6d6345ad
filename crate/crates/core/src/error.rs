use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Truncation parameters in force when a computation gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub degree: u32,
    pub precision: u32,
    pub n_max: u32,
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D={}, M={}, N_max={}", self.degree, self.precision, self.n_max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring specification: {0}")]
    InvalidSpec(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("{unit} is not a square in the residue field")]
    NotASquare { unit: String },
    #[error("operation requires an unramified ring")]
    RamifiedUnsupported,
    #[error("operation requires a ramified ring")]
    UnramifiedUnsupported,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("substituted series has a unit constant term")]
    OrderViolation,
    #[error("expected order {expected}, found {found}")]
    OrderMismatch { expected: u32, found: String },
    #[error("not finite up to bounds ({0})")]
    NotFiniteUpToBounds(Bounds),
    #[error("not found up to {0}")]
    NotFoundUpTo(u32),
    #[error("expanded generator count {count} exceeds cap {cap}")]
    CombinatorialBlowup { count: usize, cap: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("exponent {exponent} exceeds degree bound {degree} at offset {offset}")]
    ExponentOverflow { exponent: u64, degree: u32, offset: usize },
}

impl Error {
    /// Module that raises this kind of error, for structured reports.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_)
            | Error::PrecisionExhausted(_)
            | Error::NotAUnit
            | Error::NotASquare { .. }
            | Error::RamifiedUnsupported
            | Error::UnramifiedUnsupported => "coeff",
            Error::ShapeMismatch(_) | Error::OrderViolation => "series",
            Error::OrderMismatch { .. } => "normform",
            Error::NotFiniteUpToBounds(_) | Error::NotFoundUpTo(_) | Error::CombinatorialBlowup { .. } => "localalg",
            Error::Precondition(_) | Error::Inconsistent(_) => "invariants",
            Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::ExponentOverflow { .. } => "cli",
        }
    }

    pub fn bounds(&self) -> Option<Bounds> {
        match self {
            Error::NotFiniteUpToBounds(b) => Some(*b),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
