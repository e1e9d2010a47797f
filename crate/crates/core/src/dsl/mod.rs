//! The scoring language individuals are written in.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := number | metric | func '(' args ')' | '(' expr ')' | '-' factor
//! ```
//!
//! Metrics: `degree coreness betweenness closeness pagerank eigenvector
//! clustering khop(k)`. Functions: `neg abs sqrt log1p normalize rank`
//! (unary), `nsum nmean nmax` (neighbor aggregation), `min max pow`
//! (binary; `pow` needs a constant exponent in `[-4, 4]`).

mod ast;
mod eval;
mod parse;
pub(crate) mod random;

use serde::Serialize;
use thiserror::Error;

pub use ast::{AggOp, BinaryOp, Metric, ScoreExpr, UnaryOp, MAX_DEPTH, MAX_EXPONENT, MAX_SIZE};
pub use eval::{evaluate, Evaluator, MetricCache, ScoreVector};
pub use parse::parse;
pub use random::random_expr;

/// Coarse classification of [`DslError`], used in variation reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
    SizeBound,
    DepthBound,
    NonConstantExponent,
    ExponentRange,
    KhopRange,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("expression has {size} nodes, limit is {MAX_SIZE}")]
    TooLarge { size: usize },
    #[error("expression depth {depth} exceeds limit {MAX_DEPTH}")]
    TooDeep { depth: usize },
    #[error("pow exponent must be a constant")]
    NonConstantExponent,
    #[error("pow exponent {value} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]")]
    ExponentOutOfRange { value: f64 },
    #[error("khop takes an integer literal in 1..=4, got {found}")]
    KhopRange { found: String },
}

impl DslError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            DslError::Syntax { .. } => ErrorKind::Syntax,
            DslError::UnknownIdentifier { .. } => ErrorKind::UnknownIdentifier,
            DslError::Arity { .. } => ErrorKind::Arity,
            DslError::TooLarge { .. } => ErrorKind::SizeBound,
            DslError::TooDeep { .. } => ErrorKind::DepthBound,
            DslError::NonConstantExponent => ErrorKind::NonConstantExponent,
            DslError::ExponentOutOfRange { .. } => ErrorKind::ExponentRange,
            DslError::KhopRange { .. } => ErrorKind::KhopRange,
        }
    }
}

pub fn print_canonical(e: &ScoreExpr) -> String {
    e.to_string()
}
