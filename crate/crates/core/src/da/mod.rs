//! Truncated power series algebra.
//!
//! A [`TaylorPoly`] is a multivariate polynomial in `v` normalized deviation
//! variables truncated at total degree `k`; a [`TaylorMap`] is an ordered list
//! of them. Every value carries its own `(v, k)`, and combining values from
//! different spaces is an error.

mod interval;
mod map;
mod poly;
mod space;

pub use interval::RealInterval;
pub use map::{SerialMap, SerialTerm, TaylorMap};
pub use poly::{arith, ArithOp, Intrinsic, Operand, TaylorPoly};
pub use space::{basis, Basis, Exponents};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DaError {
    #[error("invalid DA space: {num_vars} variables, order {order}")]
    InvalidSpace { num_vars: usize, order: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("mismatched DA spaces (v, k): {left:?} vs {right:?}")]
    SpaceMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("division by a polynomial with zero constant part")]
    DivisionByZero,
    #[error("{function} undefined at expansion point {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("exponent {0:?} not in this DA space")]
    BadExponent(Vec<u8>),
    #[error("empty map")]
    EmptyMap,
    #[error("map is not square: {outputs} outputs, {num_vars} variables")]
    NotSquare { outputs: usize, num_vars: usize },
    #[error("map is not origin preserving (constant part up to {0:e})")]
    NotOriginPreserving(f64),
    #[error("linear part is singular (condition estimate {condition:e})")]
    SingularLinearPart { condition: f64 },
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
}
