use std::fmt;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

/// Which obligation of the loop invariant rule a counterexample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obligation {
    /// `pre` equals `thenPre PLUS elsePre` on a mixed distribution.
    Combine,
    /// The guard-true part, `[G] AND pre-gain of the body`.
    Then,
    /// The guard-false part, `[not G] AND post`.
    Else,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Obligation::Combine => "pre = thenPre PLUS elsePre",
            Obligation::Then => "thenPre = [G] AND pre-gain(body, pre)",
            Obligation::Else => "elsePre = [not G] AND post",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantFailure {
    pub obligation: Obligation,
    pub invariant: String,
    /// Rendered counterexample distribution, one `state : p` entry per line.
    pub counterexample: String,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("left operand of AND must be a single atom: {0}")]
    NonStandardAndContext(String),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(Rational),
    #[error("negative probability {0}")]
    NegativeProbability(Rational),
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("gain atom `{atom}` is negative ({value}) at {state}")]
    NegativeAtom { atom: String, value: Rational, state: String },
    #[error("integer overflow")]
    Overflow,
    #[error("loop did not terminate within {0} iterations")]
    LoopBoundExceeded(u64),
    #[error("empty quantifier range: {0}")]
    RangeEmpty(String),
    #[error("normal form would exceed {0} atoms")]
    NormalFormTooLarge(usize),
    #[error("loop at {0} has no invariant and cannot be unfolded: {1}")]
    LoopNeedsInvariantOrBound(String, String),
    #[error("loop at {pos} still iterating after {bound} unfoldings")]
    BoundTooSmall { pos: String, bound: u64 },
    #[error("invariant {} failed: {} ({} vs {}) on\n{}", .0.invariant, .0.obligation, .0.lhs, .0.rhs, .0.counterexample)]
    InvariantCheckFailed(Box<InvariantFailure>),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, col, msg: msg.into() }
    }

    /// Errors raised while executing or evaluating, as opposed to static ones.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::IndexOutOfBounds { .. }
                | Error::DivisionByZero
                | Error::Domain(_)
                | Error::NegativeAtom { .. }
                | Error::Overflow
                | Error::LoopBoundExceeded(_)
                | Error::BoundTooSmall { .. }
        )
    }
}
