use thiserror::Error;

use crate::fnexpr::Interval;

/// Failure while evaluating a function at a single point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("x = {x} lies outside the domain {domain}")]
    OutOfDomain { x: f64, domain: Interval },
    #[error("{op} is undefined for argument {arg} in `{subexpr}`")]
    Partial {
        op: &'static str,
        arg: f64,
        subexpr: String,
    },
    #[error("non-finite value produced by `{subexpr}`")]
    NonFinite { subexpr: String },
    #[error("{0}")]
    Undefined(String),
    /// A constructed function's inner integration or inversion broke down.
    #[error("numeric breakdown: {0}")]
    Numeric(String),
}

/// Syntax error from the expression parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: expected {}, found {found}", .expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("evaluation failed at grid index {index}: {source}")]
    EvalAt { index: usize, source: EvalError },
    #[error("degenerate pair: x = y = {0}")]
    DegeneratePair(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Integration/inversion budget exhausted or another numeric breakdown.
    #[error("numeric breakdown: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
