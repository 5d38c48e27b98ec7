//! Function grammar, evaluation, Taylor jets and growth classification.
//!
//! A [`FunctionExpr`] is a tree over `x`, real constants, `+ - * /`, real
//! powers, `log`, `exp`, the logarithmic integral `li` and `lgamma`, together
//! with a shift `k0` so that `f(x) := root(x + k0)` is defined on `[1, ∞)`.

mod classify;
mod eval;
mod expr;
mod jet;
mod parse;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{
    classify, fit_polynomial, monotone_probe, polynomial_part, split_polynomial, ClassifyError, DegreeProfile,
    FunctionClass, PolySplit, GROWTH_PROBES,
};
pub use expr::{FunctionExpr, Literal, Node, MAX_AUTO_SHIFT, PROBE_POINTS};
pub use jet::{Jet, MAX_JET_ORDER};

/// Working precision for [`FunctionExpr::eval`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double, roughly 32 significant digits.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} evaluated outside its domain at {arg} (shift too small?)")]
    Domain { op: &'static str, arg: f64 },
    #[error("{op} produced a non-finite value {value}")]
    NonFinite { op: &'static str, value: f64 },
    #[error("functions are evaluated on x >= 1, got {0}")]
    BelowOne(f64),
    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("malformed expression: {0}")]
    Malformed(String),
    #[error("no shift in 0..=64 makes every probe point valid; last failure: {0}")]
    NoValidShift(Box<EvalError>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}
