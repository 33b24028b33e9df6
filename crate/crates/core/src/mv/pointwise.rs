//! Pointwise mean-value functions anchored at a fixed `x0`.

use serde::Serialize;

use super::{check_pairs, MvCheck};
use crate::calculus::{central_derivative, one_sided_limit, Grid, Side, Tolerance};
use crate::error::{Error, EvalError, Result};
use crate::fnexpr::{Interval, RealFn};
use crate::report::{CheckReport, ReportBuilder, Witness};

/// Anchor `x0` and constant weight `mu` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseMvSpec {
    pub x0: f64,
    pub mu: f64,
}

impl PointwiseMvSpec {
    pub fn new(x0: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidInput(format!("mu must lie in (0, 1), got {mu}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidInput(format!("x0 must be finite, got {x0}")));
        }
        Ok(Self { x0, mu })
    }
}

/// `g(t) = mu / (t - x0) * (f(x0 + (t - x0) / mu) - f(x0))`, defined where
/// `x0 + (t - x0) / mu` lies in the domain of `f`. The removable point
/// `t = x0` carries the limit value when both one-sided limits agree, and
/// is left undefined otherwise.
#[derive(Debug, Clone)]
pub struct PointwiseMv<F> {
    f: F,
    spec: PointwiseMvSpec,
    f_x0: f64,
    domain: Interval,
    center: Option<f64>,
}

impl<F: RealFn> PointwiseMv<F> {
    pub fn spec(&self) -> PointwiseMvSpec {
        self.spec
    }

    /// Value assigned at `t = x0`, if the limits agreed.
    pub fn center_value(&self) -> Option<f64> {
        self.center
    }

    fn quotient(&self, t: f64) -> Result<f64, EvalError> {
        let PointwiseMvSpec { x0, mu } = self.spec;
        let s = x0 + (t - x0) / mu;
        Ok(mu / (t - x0) * (self.f.eval(s)? - self.f_x0))
    }
}

/// The quotient formula without the filled center, for limit extraction.
struct Quotient<'a, F>(&'a PointwiseMv<F>);

impl<F: RealFn> RealFn for Quotient<'_, F> {
    fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if t == self.0.spec.x0 {
            return Err(EvalError::Undefined(format!("quotient undefined at x0 = {t}")));
        }
        self.0.quotient(t)
    }

    fn domain(&self) -> Interval {
        self.0.domain
    }

    fn describe(&self) -> String {
        self.0.describe()
    }
}

impl<F: RealFn> RealFn for PointwiseMv<F> {
    fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(t) {
            return Err(EvalError::OutOfDomain {
                x: t,
                domain: self.domain,
            });
        }
        if t == self.spec.x0 {
            return self.center.ok_or_else(|| {
                EvalError::Undefined(format!("one-sided limits at x0 = {t} disagree; the point is excluded"))
            });
        }
        self.quotient(t)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        format!(
            "pointwise MV-function of {} at x0 = {}, mu = {}",
            self.f.describe(),
            self.spec.x0,
            self.spec.mu
        )
    }
}

/// Builds the constant-`mu` pointwise mean-value function of `f` at `x0`.
pub fn pointwise_mv_generate<F: RealFn>(f: F, spec: PointwiseMvSpec) -> Result<PointwiseMv<F>> {
    let spec = PointwiseMvSpec::new(spec.x0, spec.mu)?;
    let fdom = f.domain();
    if !fdom.contains(spec.x0) {
        return Err(Error::Precondition(format!("x0 = {} is outside {fdom}", spec.x0)));
    }
    let domain = fdom.contract_toward(spec.x0, spec.mu)?;
    let f_x0 = f.eval(spec.x0)?;
    let mut g = PointwiseMv {
        f,
        spec,
        f_x0,
        domain,
        center: None,
    };
    let q = Quotient(&g);
    let tol = Tolerance::default();
    let limit = |side| {
        let room = match side {
            Side::Left => spec.x0 > domain.lo(),
            Side::Right => spec.x0 < domain.hi(),
        };
        room.then(|| limit_at_anchor(&q, spec.x0, side)).flatten()
    };
    let center = match (limit(Side::Left), limit(Side::Right)) {
        (Some(l), Some(r)) => {
            let agree = (l.0 - r.0).abs() <= tol.slack(l.0.abs().max(r.0.abs())) + l.1 + r.1;
            agree.then_some(0.5 * (l.0 + r.0))
        }
        (Some(one), None) | (None, Some(one)) => Some(one.0),
        (None, None) => None,
    };
    g.center = center;
    Ok(g)
}

/// One-sided limit at an anchor that may sit on the domain boundary.
fn limit_at_anchor<G: RealFn>(q: &G, x0: f64, side: Side) -> Option<(f64, f64)> {
    let dom = q.domain();
    if dom.contains_interior(x0) {
        return one_sided_limit(q, x0, side).ok().map(|v| (v.value, v.est_error));
    }
    // anchor on the boundary: sample inward along a geometric sequence
    let room = match side {
        Side::Left => x0 - dom.lo(),
        Side::Right => dom.hi() - x0,
    };
    let h0 = (1e-5f64.max(1e-5 * x0.abs())).min(0.5 * room);
    let vals: Vec<f64> = (0..9)
        .map(|k| q.eval(x0 + side.sign() * h0 / 4f64.powi(k)))
        .collect::<Result<_, _>>()
        .ok()?;
    let last = vals[8];
    Some((last, (last - vals[7]).abs()))
}

/// Mean-value check restricted to the pairs `(x0, y)` with `y` on the grid.
pub fn pointwise_mv_check<F, G>(f: &F, x0: f64, g: &G, grid: &Grid, tol: &Tolerance) -> Result<MvCheck>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    if !f.domain().contains(x0) {
        return Err(Error::Precondition(format!("x0 = {x0} is outside {}", f.domain())));
    }
    let pairs = grid.points().iter().filter(|&&y| y != x0).map(|&y| (x0, y));
    check_pairs("pointwise_mv_function", f, g, pairs, tol)
}

/// Checks `mu(t mu(t) - x0 mu(t) + x0) = mu(t)` on the grid.
///
/// Values of `mu` outside `(0, 1)` fail the precondition; arguments that
/// leave the domain of `mu` are noted and skipped.
pub fn mu_equation_check<M: RealFn + ?Sized>(mu: &M, x0: f64, grid: &Grid, tol: &Tolerance) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("mu_functional_equation");
    let mut skipped = 0usize;
    for &t in grid.points() {
        let m = mu.eval(t).map_err(Error::from)?;
        if !(m > 0.0 && m < 1.0) {
            b.violation(Witness {
                points: vec![t],
                lhs: m,
                rhs: m,
                margin: f64::NEG_INFINITY,
                slack: 0.0,
            });
            b.fail(format!("precondition: mu({t}) = {m} is outside (0, 1)"));
            continue;
        }
        let arg = t * m - x0 * m + x0;
        if !mu.domain().contains(arg) {
            skipped += 1;
            continue;
        }
        let lhs = mu.eval(arg)?;
        b.close(&[t, arg], lhs, m, tol.slack(m));
    }
    if skipped > 0 {
        b.note(format!(
            "{skipped} grid points map outside the domain of mu and were skipped"
        ));
    }
    Ok(b.finish())
}

/// Residual `t f'(t) - mu f(t / mu) + mu f(0)` and its derivative error
/// estimate; `None` where the one-sided derivatives of `f` disagree.
pub fn ode_residual<F: RealFn + ?Sized>(f: &F, mu: f64, t: f64, tol: &Tolerance) -> Result<Option<(f64, f64)>> {
    let Some(d) = central_derivative(f, t, tol)? else {
        return Ok(None);
    };
    let r = t * d.value - mu * f.eval(t / mu)? + mu * f.eval(0.0)?;
    Ok(Some((r, d.est_error * t.abs())))
}

/// Checks the differential equation satisfied when the pointwise
/// mean-value function at 0 with weight `mu` equals `f'`.
pub fn ode_residual_check<F: RealFn + ?Sized>(f: &F, mu: f64, grid: &Grid, tol: &Tolerance) -> Result<CheckReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidInput(format!("mu must lie in (0, 1), got {mu}")));
    }
    let dom = f.domain();
    if !dom.contains(0.0) {
        return Err(Error::Precondition(format!("0 is not in the domain {dom}")));
    }
    let mut b = ReportBuilder::new("ode_residual");
    let (mut outside, mut kinks) = (0usize, Vec::new());
    for &t in grid.points() {
        if !dom.contains_interior(t) || !dom.contains(t / mu) {
            outside += 1;
            continue;
        }
        match ode_residual(f, mu, t, tol)? {
            None => kinks.push(t),
            Some((r, est)) => {
                let d = central_derivative(f, t, tol)?.map_or(0.0, |d| d.value);
                let allowed = tol.abs_tol * 1f64.max((t * d).abs()) + est;
                b.close(&[t], r, 0.0, allowed);
            }
        }
    }
    if outside > 0 {
        b.note(format!(
            "{outside} grid points have t / mu outside the domain and were skipped"
        ));
    }
    if !kinks.is_empty() {
        b.note(format!(
            "{} points are indeterminate (one-sided derivatives disagree) and excluded: {:?}",
            kinks.len(),
            &kinks[..kinks.len().min(8)]
        ));
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnexpr::RealFunction;

    fn f(src: &str) -> RealFunction {
        RealFunction::on_reals(src).unwrap()
    }

    fn on(src: &str, lo: f64, hi: f64) -> RealFunction {
        RealFunction::parse(src, Interval::closed(lo, hi).unwrap()).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::uniform(Interval::open(lo, hi).unwrap(), n, (-10.0, 10.0), 1e-9, 1e-9).unwrap()
    }

    #[test]
    fn generator_examples() {
        let g = pointwise_mv_generate(f("x^2"), PointwiseMvSpec::new(0.0, 0.5).unwrap()).unwrap();
        for t in [-1.5, -0.25, 0.3, 1.9] {
            assert!((g.eval(t).unwrap() - 2.0 * t).abs() < 1e-12);
        }
        assert!(g.center_value().unwrap().abs() < 1e-9);

        let id = pointwise_mv_generate(f("x"), PointwiseMvSpec::new(0.7, 0.3).unwrap()).unwrap();
        for t in [-3.0, 0.0, 2.5] {
            assert!((id.eval(t).unwrap() - 1.0).abs() < 1e-12);
        }

        let e = pointwise_mv_generate(f("exp(x)"), PointwiseMvSpec::new(0.0, 0.5).unwrap()).unwrap();
        for t in [-1.0f64, 0.5, 2.0] {
            let expected = ((2.0 * t).exp() - 1.0) / (2.0 * t);
            assert!((e.eval(t).unwrap() - expected).abs() < 1e-12);
        }
        assert!((e.eval(0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn generated_domain_and_hole() {
        let g = pointwise_mv_generate(on("x^2", -2.0, 2.0), PointwiseMvSpec::new(1.0, 0.5).unwrap()).unwrap();
        assert_eq!(g.domain(), Interval::closed(-0.5, 1.5).unwrap());
        let abs = pointwise_mv_generate(f("abs(x)"), PointwiseMvSpec::new(0.0, 0.5).unwrap()).unwrap();
        assert!(abs.center_value().is_none());
        assert!(abs.eval(0.0).is_err());
        assert_eq!(abs.eval(-0.2).unwrap(), -1.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(PointwiseMvSpec::new(0.0, 1.0).is_err());
        assert!(PointwiseMvSpec::new(0.0, 0.0).is_err());
        let spec = PointwiseMvSpec { x0: 5.0, mu: 0.5 };
        assert!(pointwise_mv_generate(on("x", 0.0, 1.0), spec).is_err());
    }

    #[test]
    fn pointwise_check_examples() {
        let tol = Tolerance::default();
        let gr = grid(-2.0, 2.0, 41);
        assert!(pointwise_mv_check(&f("x^2"), 0.0, &f("2*x"), &gr, &tol)
            .unwrap()
            .passed());

        let sq = on("x^2", -2.0, 2.0);
        let g = pointwise_mv_generate(sq.clone(), PointwiseMvSpec::new(1.0, 0.5).unwrap()).unwrap();
        let r = pointwise_mv_check(&sq, 1.0, &g, &gr, &tol).unwrap();
        assert!(r.passed(), "{:?}", r.report);

        assert!(pointwise_mv_check(&f("abs(x)"), 0.0, &f("sgn(x)"), &gr, &tol)
            .unwrap()
            .passed());
    }

    #[test]
    fn mu_equation_examples() {
        let tol = Tolerance::default();
        let gr = grid(-3.0, 3.0, 61);
        for (m, x0) in [("0.5", 2.0), ("0.25", 1.0)] {
            let r = mu_equation_check(&f(m), x0, &gr, &tol).unwrap();
            assert!(r.passed);
            assert_eq!(r.min_margin, Some(tol.slack(m.parse::<f64>().unwrap())));
        }
        let sigmoid = f("1/(1+exp(-x))");
        let r = mu_equation_check(&sigmoid, 0.0, &gr, &tol).unwrap();
        assert!(!r.passed);
        let one = Grid::from_points(vec![0.5, 1.0, 1.5], Interval::real_line()).unwrap();
        let r = mu_equation_check(&sigmoid, 0.0, &one, &tol).unwrap();
        assert!(r.failing_points().any(|p| p[0] == 1.0));
        assert!(!mu_equation_check(&f("2"), 0.0, &gr, &tol).unwrap().passed);
    }

    #[test]
    fn ode_examples() {
        let tol = Tolerance::uniform(1e-8);
        let gr = grid(-1.0, 1.0, 41);
        assert!(ode_residual_check(&f("2.5*x"), 0.5, &gr, &tol).unwrap().passed);
        assert!(ode_residual_check(&f("0"), 0.3, &gr, &tol).unwrap().passed);
        // x^2 solves the equation at mu = 1/2; residual is t^2 (2 - 1/mu)
        assert!(ode_residual_check(&f("x^2"), 0.5, &gr, &tol).unwrap().passed);
        let r = ode_residual_check(&f("x^2"), 0.25, &gr, &tol).unwrap();
        assert!(!r.passed);
        let (res, _) = ode_residual(&f("x^2"), 0.25, 1.0, &tol).unwrap().unwrap();
        assert!((res + 2.0).abs() < 1e-6, "{res}");
    }

    #[test]
    fn ode_flags_kinks() {
        let tol = Tolerance::uniform(1e-8);
        let gr = Grid::from_points(vec![-0.5, 0.0, 0.5], Interval::real_line()).unwrap();
        let r = ode_residual_check(&f("abs(x)"), 0.5, &gr, &tol).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("indeterminate")));
        assert_eq!(r.evaluated, 2);
    }
}
