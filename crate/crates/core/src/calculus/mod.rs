//! Numerical primitives shared by every checker: difference quotients,
//! one-sided derivatives and limits, monotone quadrature and grid checks.

mod antiderivative;
mod checks;
mod derivative;
mod grid;
mod integrate;

pub use antiderivative::{Antiderivative, MESH_POINTS};
pub use checks::{check_convex, check_monotone, check_monotone_values, Direction};
pub use derivative::{central_derivative, one_sided_derivative, one_sided_limit};
pub use grid::{Grid, GridSpec};
pub use integrate::{integrate_monotone, Integral};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fnexpr::RealFn;

/// Tolerances for float comparisons.
///
/// Non-strict inequalities `a <= b` are accepted when `a <= b + slack`,
/// with `slack = abs_tol + rel_tol * scale`. `strict_margin` is the gap
/// above which a strict inequality is reported as robustly strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub strict_margin: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            strict_margin: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, strict_margin: f64) -> Result<Self> {
        let vals = [abs_tol, rel_tol, strict_margin];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("tolerances must be finite and non-negative".into()));
        }
        if vals.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidInput("tolerances cannot all be zero".into()));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            strict_margin,
        })
    }

    /// Same absolute and relative tolerance, default strict margin.
    pub fn uniform(tol: f64) -> Self {
        Self::new(tol, tol, Self::default().strict_margin).expect("valid tolerance")
    }

    pub fn slack(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// One-sided derivative or limit with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidedValue {
    pub point: f64,
    pub side: Side,
    pub value: f64,
    pub est_error: f64,
}

/// `(f(y) - f(x)) / (y - x)`; symmetric in `x` and `y`.
pub fn difference_quotient<F: RealFn + ?Sized>(f: &F, x: f64, y: f64) -> Result<f64> {
    if x == y {
        return Err(Error::DegeneratePair(x));
    }
    let (a, b) = if x < y { (x, y) } else { (y, x) };
    let (fa, fb) = (f.eval(a)?, f.eval(b)?);
    Ok((fb - fa) / (b - a))
}

/// Rounding noise of a difference quotient computed from `fx`, `fy`.
pub(crate) fn dq_noise(fx: f64, fy: f64, dx: f64) -> f64 {
    4.0 * f64::EPSILON * (fx.abs() + fy.abs()) / dx.abs()
}
