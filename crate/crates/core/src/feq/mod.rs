//! The mean-value functional equation `f(y) - f(x) = g(eta(x, y)) (y - x)`,
//! the inequality `min(x, y) < h(DQ(x, y)) < max(x, y)`, their solvers, and
//! checks for the comparative-convexity systems with closed-form solutions.

mod inverse;
mod ode;
mod systems;

pub use inverse::Inverse;
pub use ode::{OdeSolution, STEP_ERROR};
pub use systems::{
    convex_concave_check, linear_comparative_solve, self_convexity_check, symmetric_convexity_check, LinearSolution,
    SystemVerdict, CONVEX_CONCAVE, LINEAR, SELF_CONVEX, SYMMETRIC,
};

use std::collections::BTreeMap;

use crate::calculus::{difference_quotient, one_sided_derivative, Antiderivative, Grid, Side, Tolerance};
use crate::error::{Error, Result};
use crate::fnexpr::{Interval, RealFn};
use crate::mv::{select_pairs, strict_mean_check, MeanFunctionSample, PAIR_BUDGET};
use crate::report::{CheckReport, ReportBuilder, Witness};

/// A constructed solution `f` with its mean `eta(x, y) = mean_map(DQ_f(x, y))`.
#[derive(Debug, Clone)]
pub struct FeqSolution<F, M> {
    pub f: F,
    mean_map: M,
    pub params: BTreeMap<String, f64>,
}

impl<F: RealFn, M: RealFn> FeqSolution<F, M> {
    pub fn mean_map(&self) -> &M {
        &self.mean_map
    }

    pub fn eta(&self, x: f64, y: f64) -> Result<f64> {
        let dq = difference_quotient(&self.f, x, y)?;
        Ok(self.mean_map.eval(dq)?)
    }

    /// Mean samples over grid pairs (a stratified subset on large grids).
    pub fn eta_samples(&self, grid: &Grid) -> Result<Vec<MeanFunctionSample>> {
        let xs = grid.points();
        select_pairs(xs.len(), PAIR_BUDGET)
            .into_iter()
            .map(|(i, j)| Ok(MeanFunctionSample::new(xs[i], xs[j], self.eta(xs[i], xs[j])?)))
            .collect()
    }

    /// Strictness of every sampled mean.
    pub fn strictness(&self, grid: &Grid, tol: &Tolerance) -> Result<CheckReport> {
        strict_mean_check(&self.eta_samples(grid)?, tol)
    }
}

/// Checks `min(x, y) < h(DQ(x, y)) < max(x, y)` on grid pairs.
///
/// Witness points are `[x, y]` with `lhs = h(DQ)`; `rhs` is the nearer end.
pub fn mv_inequality_check<F, H>(f: &F, h: &H, grid: &Grid, tol: &Tolerance) -> Result<CheckReport>
where
    F: RealFn + ?Sized,
    H: RealFn + ?Sized,
{
    let xs = grid.points();
    let pairs = select_pairs(xs.len(), PAIR_BUDGET);
    let mut b = ReportBuilder::new("mv_inequality");
    let mut fragile = 0usize;
    for &(i, j) in &pairs {
        let (x, y) = (xs[i], xs[j]);
        let dq = difference_quotient(f, x, y)?;
        let v = h
            .eval(dq)
            .map_err(|e| Error::Precondition(format!("{} is undefined at DQ({x}, {y}) = {dq}: {e}", h.describe())))?;
        b.count();
        let gap = (v - x).min(y - v);
        if !(x < v && v < y) {
            let near = if v - x < y - v { x } else { y };
            b.violation(Witness {
                points: vec![x, y],
                lhs: v,
                rhs: near,
                margin: if gap.is_nan() { f64::NEG_INFINITY } else { gap },
                slack: 0.0,
            });
        } else if gap < tol.strict_margin * (y - x) {
            fragile += 1;
        }
    }
    if fragile > 0 {
        b.note(format!(
            "{fragile} pairs lie within strict_margin of an end (strictness not robust)"
        ));
    }
    if pairs.len() < xs.len() * (xs.len() - 1) / 2 {
        b.note(format!("checked a stratified subset of {} grid pairs", pairs.len()));
    }
    Ok(b.finish())
}

fn solution_params(c: f64, f_c: f64, error_estimate: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("c".to_string(), c),
        ("f_c".to_string(), f_c),
        ("integration_error_estimate".to_string(), error_estimate),
    ])
}

/// All solutions of the inequality for a strictly monotone continuous `h`:
/// `f(t) = f_c + integral of h^{-1} from c to t`. The mean of the result is
/// `h` applied to the difference quotient.
pub fn solve_mv_inequality<H: RealFn + Clone>(
    h: H,
    domain: Interval,
    c: f64,
    f_c: f64,
    window: (f64, f64),
) -> Result<FeqSolution<Antiderivative<Inverse<H>>, H>> {
    let inv = Inverse::new(h.clone(), h.domain(), domain, window)?;
    let f = Antiderivative::new(inv, c, f_c, domain, window)?;
    let params = solution_params(c, f_c, f.error_estimate());
    Ok(FeqSolution { f, mean_map: h, params })
}

/// Solutions of the equation for a strictly monotone continuous `g`:
/// `f = f_c + integral of g from c`, with `eta = g^{-1}(DQ_f)`.
pub fn solve_mv_equation<G: RealFn + Clone>(
    g: G,
    domain: Interval,
    c: f64,
    f_c: f64,
    window: (f64, f64),
) -> Result<FeqSolution<Antiderivative<G>, Inverse<G>>> {
    let inv = Inverse::new(g.clone(), domain, Interval::real_line(), window)?;
    let f = Antiderivative::new(g, c, f_c, domain, window)?;
    let params = solution_params(c, f_c, f.error_estimate());
    Ok(FeqSolution {
        f,
        mean_map: inv,
        params,
    })
}

/// Passes iff `h(f'_+(x)) = x` at every grid point interior to the domain,
/// and the one-sided derivatives agree there.
///
/// Witness points are `[x]`.
pub fn uniqueness_probe<F, H>(f: &F, h: &H, grid: &Grid, tol: &Tolerance) -> Result<CheckReport>
where
    F: RealFn + ?Sized,
    H: RealFn + ?Sized,
{
    let mut b = ReportBuilder::new("uniqueness_probe");
    let mut kinks = 0usize;
    for &x in grid.points() {
        if !f.domain().contains_interior(x) {
            continue;
        }
        let l = one_sided_derivative(f, x, Side::Left)?;
        let r = one_sided_derivative(f, x, Side::Right)?;
        let agree = tol.slack(l.value.abs().max(r.value.abs())) + l.est_error + r.est_error;
        if (l.value - r.value).abs() > agree {
            kinks += 1;
            b.close(&[x], l.value, r.value, agree);
            continue;
        }
        let v = h.eval(r.value)?;
        // propagate the derivative's error through h
        let spread = match (h.eval(r.value - r.est_error), h.eval(r.value + r.est_error)) {
            (Ok(a), Ok(c)) => 0.5 * (c - a).abs(),
            _ => 0.0,
        };
        b.close(&[x], v, x, tol.slack(x) + spread);
    }
    if kinks > 0 {
        b.note(format!(
            "{kinks} grid points where the one-sided derivatives of f disagree"
        ));
    }
    Ok(b.finish())
}
