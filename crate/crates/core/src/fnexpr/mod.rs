//! Expression language for the real functions handled by every checker.
//!
//! All other modules see functions only through [`RealFn`]: a domain plus a
//! fallible point evaluation. Parsed expressions ([`RealFunction`]) are one
//! implementation; constructed functions (integrals, numeric inverses,
//! pointwise generators) are others.

mod ast;
mod interval;
mod parse;

pub use ast::{BinOp, Expr, Func};
pub use interval::Interval;
pub use parse::parse;

use crate::calculus::Grid;
use crate::error::{Error, EvalError, Result};

/// A real function of one variable on an interval domain.
pub trait RealFn {
    /// Evaluates at `x`; `x` must lie in [`RealFn::domain`].
    fn eval(&self, x: f64) -> Result<f64, EvalError>;

    fn domain(&self) -> Interval;

    /// Short human-readable description used in reports.
    fn describe(&self) -> String;
}

impl<T: RealFn + ?Sized> RealFn for &T {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        (**self).eval(x)
    }

    fn domain(&self) -> Interval {
        (**self).domain()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: RealFn + ?Sized> RealFn for Box<T> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        (**self).eval(x)
    }

    fn domain(&self) -> Interval {
        (**self).domain()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Parsed expression together with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFunction {
    body: Expr,
    domain: Interval,
}

impl RealFunction {
    pub fn new(body: Expr, domain: Interval) -> Self {
        Self { body, domain }
    }

    pub fn parse(source: &str, domain: Interval) -> Result<Self> {
        Ok(Self::new(parse(source)?, domain))
    }

    /// Parses `source` on the whole real line.
    pub fn on_reals(source: &str) -> Result<Self> {
        Self::parse(source, Interval::real_line())
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn with_domain(&self, domain: Interval) -> Self {
        Self::new(self.body.clone(), domain)
    }
}

impl RealFn for RealFunction {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            return Err(EvalError::OutOfDomain { x, domain: self.domain });
        }
        eval_expr(&self.body, x)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        self.body.to_string()
    }
}

/// Constant function on a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub domain: Interval,
}

impl RealFn for Constant {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            return Err(EvalError::OutOfDomain { x, domain: self.domain });
        }
        Ok(self.value)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        format!("{}", self.value)
    }
}

/// A closure viewed as a [`RealFn`].
pub struct FromFn<C> {
    eval: C,
    domain: Interval,
    name: String,
}

impl<C: Fn(f64) -> Result<f64, EvalError>> FromFn<C> {
    pub fn new(name: impl Into<String>, domain: Interval, eval: C) -> Self {
        Self {
            eval,
            domain,
            name: name.into(),
        }
    }
}

impl<C: Fn(f64) -> Result<f64, EvalError>> RealFn for FromFn<C> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            return Err(EvalError::OutOfDomain { x, domain: self.domain });
        }
        (self.eval)(x)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Evaluates `f` at every grid point, preserving order.
pub fn eval_grid<F: RealFn + ?Sized>(f: &F, grid: &Grid) -> Result<Vec<f64>> {
    eval_points(f, grid.points())
}

pub(crate) fn eval_points<F: RealFn + ?Sized>(f: &F, points: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(index, &x)| f.eval(x).map_err(|source| Error::EvalAt { index, source }))
        .collect()
}

fn partial(op: &'static str, arg: f64, e: &Expr) -> EvalError {
    EvalError::Partial {
        op,
        arg,
        subexpr: e.to_string(),
    }
}

fn finite(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { subexpr: e.to_string() })
    }
}

pub fn eval_expr(e: &Expr, x: f64) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Num(v) => *v,
        Expr::Var => x,
        Expr::Neg(a) => -eval_expr(a, x)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_expr(a, x)?, eval_expr(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(partial("division", b, e));
                    }
                    a / b
                }
                BinOp::Pow => pow(a, b).ok_or_else(|| partial("power base", a, e))?,
            }
        }
        Expr::Call(func, args) => {
            let a = eval_expr(&args[0], x)?;
            match func {
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(partial("log", a, e));
                    }
                    a.ln()
                }
                Func::Abs => a.abs(),
                Func::Sgn => {
                    if a > 0.0 {
                        1.0
                    } else if a < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(partial("sqrt", a, e));
                    }
                    a.sqrt()
                }
                Func::Min => a.min(eval_expr(&args[1], x)?),
                Func::Max => a.max(eval_expr(&args[1], x)?),
            }
        }
    };
    finite(v, e)
}

/// `base^exponent`; integer exponents accept any base, others need a
/// positive base (zero is allowed for positive exponents).
fn pow(base: f64, exponent: f64) -> Option<f64> {
    if base == 0.0 && exponent < 0.0 {
        return None;
    }
    if exponent.fract() == 0.0 {
        if exponent.abs() <= i32::MAX as f64 {
            return Some(base.powi(exponent as i32));
        }
        return Some(base.powf(exponent));
    }
    if base < 0.0 {
        return None;
    }
    Some(base.powf(exponent))
}
