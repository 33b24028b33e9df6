use serde::Serialize;

use crate::calculus::{central_derivative, check_convex, one_sided_derivative, one_sided_limit, Grid, Side, Tolerance};
use crate::error::{Error, EvalError, Result};
use crate::fnexpr::{eval_grid, Interval, RealFn, RealFunction};
use crate::report::{CheckReport, ReportBuilder};

fn eval_error(e: Error) -> EvalError {
    match e {
        Error::Eval(inner) | Error::EvalAt { source: inner, .. } => inner,
        other => EvalError::Numeric(other.to_string()),
    }
}

fn interior(d: Interval) -> Interval {
    Interval::new(d.lo(), d.hi(), false, false).unwrap_or(d)
}

/// Merges a sub-check into `b`, keeping its witnesses and a summary note.
fn absorb(b: &mut ReportBuilder, sub: CheckReport) {
    for _ in 0..sub.evaluated {
        b.count();
    }
    if sub.passed {
        return;
    }
    b.note(format!("{}: {} violations", sub.check, sub.violations));
    for w in sub.worst.into_iter().chain(sub.witnesses) {
        b.violation(w);
    }
    for n in sub.notes {
        b.note(n);
    }
}

/// Certifies `g` as a slope bound of `f` through derivatives: `f` convex
/// on the grid, `f'_-(x) <= g(x) <= f'_+(x)` at every grid point, and the
/// one-sided limits `g(x-) = f'_-(x)`, `g(x+) = f'_+(x)`.
///
/// Witness points are `[x]`; the notes name the failing sub-check.
pub fn bounds_certificate<F, G>(f: &F, g: &G, grid: &Grid, tol: &Tolerance) -> Result<CheckReport>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let mut b = ReportBuilder::new("bounds_certificate");
    absorb(&mut b, check_convex(f, grid, tol)?);
    let mut between = ReportBuilder::new("derivative_bounds");
    let mut limits = ReportBuilder::new("limit_identities");
    let mut skipped = 0usize;
    let gs = eval_grid(g, grid)?;
    for (&x, &gx) in grid.points().iter().zip(&gs) {
        if !f.domain().contains_interior(x) {
            skipped += 1;
            continue;
        }
        let l = one_sided_derivative(f, x, Side::Left)?;
        let r = one_sided_derivative(f, x, Side::Right)?;
        between.ge(&[x], gx, l.value, tol.slack(l.value.max(gx)) + l.est_error);
        between.le(&[x], gx, r.value, tol.slack(r.value.max(gx)) + r.est_error);
        if g.domain().contains_interior(x) {
            for d in [l, r] {
                let lim = one_sided_limit(g, x, d.side)?;
                let slack = tol.slack(lim.value.abs().max(d.value.abs())) + lim.est_error + d.est_error;
                limits.close(&[x], lim.value, d.value, slack);
            }
        }
    }
    absorb(&mut b, between.finish());
    absorb(&mut b, limits.finish());
    if skipped > 0 {
        b.note(format!(
            "{skipped} grid points are not interior to the domain of f and were skipped"
        ));
    }
    Ok(b.finish())
}

/// Weight function `lambda` with values in `[0, 1]` for
/// `g = lambda f'_- + (1 - lambda) f'_+`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaBlend {
    pub lambda_fn: RealFunction,
}

impl LambdaBlend {
    pub fn new(lambda_fn: RealFunction) -> Self {
        Self { lambda_fn }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidInput(format!("lambda {value} is outside [0, 1]")));
        }
        Ok(Self::new(RealFunction::on_reals(&value.to_string())?))
    }

    fn at(&self, x: f64) -> Result<f64, EvalError> {
        let l = self.lambda_fn.eval(x)?;
        if !(0.0..=1.0).contains(&l) {
            return Err(EvalError::Undefined(format!("lambda({x}) = {l} is outside [0, 1]")));
        }
        Ok(l)
    }
}

/// `x -> lambda(x) f'_-(x) + (1 - lambda(x)) f'_+(x)` on the interior of
/// the domain of `f`, evaluated lazily.
#[derive(Debug, Clone)]
pub struct DqbFamily<F> {
    f: F,
    blend: LambdaBlend,
}

impl<F: RealFn> DqbFamily<F> {
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        eval_grid(self, grid)
    }
}

impl<F: RealFn> RealFn for DqbFamily<F> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let lam = self.blend.at(x)?;
        let l = one_sided_derivative(&self.f, x, Side::Left).map_err(eval_error)?;
        let r = one_sided_derivative(&self.f, x, Side::Right).map_err(eval_error)?;
        Ok(lam * l.value + (1.0 - lam) * r.value)
    }

    fn domain(&self) -> Interval {
        interior(self.f.domain())
    }

    fn describe(&self) -> String {
        format!(
            "{0} * f'_- + (1 - {0}) * f'_+ for f = {1}",
            self.blend.lambda_fn.describe(),
            self.f.describe()
        )
    }
}

/// The slope bound family of a convex `f` for the weight `blend`.
pub fn dqb_family<F: RealFn>(f: F, blend: LambdaBlend, grid: &Grid, tol: &Tolerance) -> Result<DqbFamily<F>> {
    let convex = check_convex(&f, grid, tol)?;
    if !convex.passed {
        return Err(Error::Precondition(format!(
            "{} is not convex on the grid",
            f.describe()
        )));
    }
    Ok(DqbFamily { f, blend })
}

/// A slope bound given by `f'` away from finitely many exception points
/// `c_n`, where it takes the values `d_n`.
#[derive(Debug, Clone)]
pub struct DqbSpec<F> {
    base: F,
    exceptions: Vec<(f64, f64)>,
    tol: Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exception {
    pub c: f64,
    pub d: f64,
}

impl<F: RealFn> DqbSpec<F> {
    /// Requires strictly increasing interior `c_n` and
    /// `d_n` in `[f'_-(c_n), f'_+(c_n)]` up to the tolerance.
    pub fn new(base: F, exceptions: Vec<(f64, f64)>, tol: Tolerance) -> Result<Self> {
        if let Some(w) = exceptions.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidInput(format!(
                "exception points must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        for &(c, d) in &exceptions {
            let l = one_sided_derivative(&base, c, Side::Left)?;
            let r = one_sided_derivative(&base, c, Side::Right)?;
            let low = l.value - tol.slack(l.value) - l.est_error;
            let high = r.value + tol.slack(r.value) + r.est_error;
            if !(low <= d && d <= high) {
                return Err(Error::InvalidInput(format!(
                    "d = {d} at c = {c} is outside [{}, {}]",
                    l.value, r.value
                )));
            }
        }
        Ok(Self { base, exceptions, tol })
    }

    pub fn exceptions(&self) -> Vec<Exception> {
        self.exceptions.iter().map(|&(c, d)| Exception { c, d }).collect()
    }
}

impl<F: RealFn> RealFn for DqbSpec<F> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if let Ok(k) = self.exceptions.binary_search_by(|e| e.0.total_cmp(&x)) {
            return Ok(self.exceptions[k].1);
        }
        match central_derivative(&self.base, x, &self.tol).map_err(eval_error)? {
            Some(d) => Ok(d.value),
            None => Err(EvalError::Undefined(format!(
                "{} is not differentiable at {x}, which is not an exception point",
                self.base.describe()
            ))),
        }
    }

    fn domain(&self) -> Interval {
        interior(self.base.domain())
    }

    fn describe(&self) -> String {
        format!(
            "derivative of {} with {} exception points",
            self.base.describe(),
            self.exceptions.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(src: &str) -> RealFunction {
        RealFunction::on_reals(src).unwrap()
    }

    fn grid(n: usize) -> Grid {
        Grid::uniform(Interval::open(-2.0, 2.0).unwrap(), n, (-10.0, 10.0), 1e-9, 1e-9).unwrap()
    }

    #[test]
    fn certificate_examples() {
        let tol = Tolerance::default();
        let g = grid(21);
        let r = bounds_certificate(&f("abs(x)"), &f("sgn(x) + (1 - abs(sgn(x)))"), &g, &tol).unwrap();
        assert!(r.passed, "{r:?}");
        let r = bounds_certificate(&f("abs(x)"), &f("sgn(x) + 2 * (1 - abs(sgn(x)))"), &g, &tol).unwrap();
        assert!(!r.passed);
        assert!(r.failing_points().all(|p| p == [0.0]));
        assert!(bounds_certificate(&f("x^2"), &f("2*x"), &g, &tol).unwrap().passed);
        assert!(!bounds_certificate(&f("-x^2"), &f("-2*x"), &g, &tol).unwrap().passed);
    }

    #[test]
    fn blend_examples() {
        let tol = Tolerance::default();
        let g = grid(21);
        let half = dqb_family(f("abs(x)"), LambdaBlend::constant(0.5).unwrap(), &g, &tol).unwrap();
        assert_eq!(half.eval(0.0).unwrap(), 0.0);
        assert!((half.eval(-0.7).unwrap() + 1.0).abs() < 1e-9);
        let zero = dqb_family(f("abs(x)"), LambdaBlend::constant(0.0).unwrap(), &g, &tol).unwrap();
        assert!((zero.eval(0.0).unwrap() - 1.0).abs() < 1e-12);
        let sq = dqb_family(f("x^2"), LambdaBlend::new(f("(1 + sgn(x)) / 2")), &g, &tol).unwrap();
        for (x, v) in g.points().iter().zip(sq.sample(&g).unwrap()) {
            assert!((v - 2.0 * x).abs() < 1e-8);
        }
        assert!(bounds_certificate(&f("abs(x)"), &half, &g, &tol).unwrap().passed);
        assert!(dqb_family(f("-abs(x)"), LambdaBlend::constant(0.5).unwrap(), &g, &tol).is_err());
        let wild = dqb_family(f("abs(x)"), LambdaBlend::new(f("2")), &g, &tol).unwrap();
        assert!(wild.eval(0.0).is_err());
    }

    #[test]
    fn exception_specs() {
        let tol = Tolerance::default();
        let spec = DqbSpec::new(f("abs(x)"), vec![(0.0, 0.25)], tol).unwrap();
        assert_eq!(spec.eval(0.0).unwrap(), 0.25);
        assert!((spec.eval(1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(bounds_certificate(&f("abs(x)"), &spec, &grid(21), &tol).unwrap().passed);
        assert!(DqbSpec::new(f("abs(x)"), vec![(0.0, 1.5)], tol).is_err());
        assert!(DqbSpec::new(f("abs(x)"), vec![(0.5, 1.0), (0.5, 1.0)], tol).is_err());
        let missing = DqbSpec::new(f("abs(x)"), vec![], tol).unwrap();
        assert!(missing.eval(0.0).is_err());
    }
}
