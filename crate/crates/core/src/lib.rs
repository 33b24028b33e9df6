//! Mean-value functions and comparative convexity.
//!
//! Numerical checkers with counterexample witnesses for the mean-value
//! relation `f(y) - f(x) = g(c) (y - x)`, pointwise mean-value generators,
//! g-compared convexity (`f(x) >= f(y) + g(y) (x - y)`) through all of its
//! equivalent characterizations, and solvers for the associated functional
//! equations and inequalities.

// `!(a < b)` style comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod error;
pub mod feq;
pub mod fnexpr;
pub mod gconvex;
pub mod mv;
pub mod report;

pub use calculus::{Grid, GridSpec, Side, SidedValue, Tolerance};
pub use error::{Error, EvalError, ParseError, Result};
pub use fnexpr::{Interval, RealFn, RealFunction};
pub use report::{CheckReport, Witness};
