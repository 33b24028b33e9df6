//! g-compared convexity: `f(x) >= f(y) + g(y) (x - y)` for all `x, y`.
//!
//! The definition is checked directly and through its equivalent
//! characterizations (two-sided bound, blended-point inequalities,
//! quotient sandwich, chord-slope chain), and through derivative bounds.
//! Functions with a given slope bound are constructed by integration.

mod bounds;

pub use bounds::{bounds_certificate, dqb_family, DqbFamily, DqbSpec, LambdaBlend};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::calculus::{check_monotone, dq_noise, Antiderivative, Grid, Tolerance};
use crate::error::{Error, Result};
use crate::fnexpr::{eval_grid, Interval, RealFn};
use crate::report::{CheckReport, ReportBuilder};

/// Condition identifiers, in reporting order.
pub const DEFINITION: &str = "definition";
pub const TWO_SIDED: &str = "two_sided_bound";
pub const BLEND_LEFT: &str = "blend_at_x";
pub const QUOTIENT_SANDWICH: &str = "quotient_sandwich";
pub const BLEND_RIGHT: &str = "blend_at_y";
pub const CHAIN: &str = "slope_chain";

pub const DEFAULT_LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GConvexWitness {
    pub condition: String,
    pub x: f64,
    pub y: f64,
    /// Third point of a chain triple.
    pub z: Option<f64>,
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GConvexReport {
    pub passed: bool,
    pub per_condition: BTreeMap<String, bool>,
    /// Verdicts of the blended conditions restricted to `0 < lambda < 1`,
    /// reported without bearing on `passed`.
    pub open_lambda: BTreeMap<String, bool>,
    /// Set when the condition verdicts disagree, which the theory rules out.
    pub consistency_alarm: bool,
    pub witnesses: Vec<GConvexWitness>,
    pub conditions: BTreeMap<String, CheckReport>,
    pub notes: Vec<String>,
}

/// Slack for comparing sums of the given terms.
pub(crate) fn sum_slack(tol: &Tolerance, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    tol.slack(scale) + 4.0 * f64::EPSILON * terms.iter().map(|t| t.abs()).sum::<f64>()
}

enum Shape {
    Pair,
    Blend,
    Triple,
}

fn witnesses_of(condition: &str, report: &CheckReport, shape: Shape) -> Vec<GConvexWitness> {
    let mut all: Vec<_> = report.worst.iter().chain(&report.witnesses).collect();
    all.dedup_by(|a, b| a.points == b.points && a.lhs == b.lhs && a.rhs == b.rhs);
    all.into_iter()
        .map(|w| {
            let (z, lambda) = match shape {
                Shape::Pair => (None, None),
                Shape::Blend => (None, w.points.get(2).copied()),
                Shape::Triple => (w.points.get(2).copied(), None),
            };
            GConvexWitness {
                condition: condition.to_string(),
                x: w.points[0],
                y: w.points[1],
                z,
                lambda,
                lhs: w.lhs,
                rhs: w.rhs,
                margin: w.margin,
            }
        })
        .collect()
}

struct Sampled {
    xs: Vec<f64>,
    fs: Vec<f64>,
    gs: Vec<f64>,
}

impl Sampled {
    fn new<F: RealFn + ?Sized, G: RealFn + ?Sized>(f: &F, g: &G, grid: &Grid) -> Result<Self> {
        Ok(Self {
            xs: grid.points().to_vec(),
            fs: eval_grid(f, grid)?,
            gs: eval_grid(g, grid)?,
        })
    }

    fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.xs.len();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

fn definition(s: &Sampled, tol: &Tolerance) -> CheckReport {
    let mut b = ReportBuilder::new(DEFINITION);
    for (i, j) in s.ordered_pairs() {
        let (x, y) = (s.xs[i], s.xs[j]);
        let step = s.gs[j] * (x - y);
        b.ge(
            &[x, y],
            s.fs[i],
            s.fs[j] + step,
            sum_slack(tol, &[s.fs[i], s.fs[j], step]),
        );
    }
    b.finish()
}

fn two_sided(s: &Sampled, tol: &Tolerance) -> CheckReport {
    let mut b = ReportBuilder::new(TWO_SIDED);
    for (i, j) in s.ordered_pairs() {
        let (x, y) = (s.xs[i], s.xs[j]);
        let rise = s.fs[j] - s.fs[i];
        let (low, high) = (s.gs[i] * (y - x), s.gs[j] * (y - x));
        let slack = sum_slack(tol, &[s.fs[i], s.fs[j], low, high]);
        b.le(&[x, y], low, rise, slack);
        b.le(&[x, y], rise, high, slack);
    }
    b.finish()
}

fn quotient_sandwich(s: &Sampled, tol: &Tolerance) -> CheckReport {
    let mut b = ReportBuilder::new(QUOTIENT_SANDWICH);
    let n = s.xs.len();
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (s.xs[i], s.xs[j]);
            let dq = (s.fs[j] - s.fs[i]) / (y - x);
            let slack = sum_slack(tol, &[s.gs[i], dq, s.gs[j]]) + dq_noise(s.fs[i], s.fs[j], y - x);
            b.le(&[x, y], s.gs[i], dq, slack);
            b.le(&[x, y], dq, s.gs[j], slack);
        }
    }
    b.finish()
}

fn chain(s: &Sampled, tol: &Tolerance) -> CheckReport {
    let n = s.xs.len();
    let mut dq = vec![0.0; n * n];
    let mut slack = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let dx = s.xs[j] - s.xs[i];
            let q = (s.fs[j] - s.fs[i]) / dx;
            dq[i * n + j] = q;
            slack[i * n + j] = sum_slack(tol, &[s.gs[i], q, s.gs[j]]) + dq_noise(s.fs[i], s.fs[j], dx);
        }
    }
    let mut b = ReportBuilder::new(CHAIN);
    for i in 0..n {
        for j in i + 1..n {
            let (left, ls) = (dq[i * n + j], slack[i * n + j]);
            for k in j + 1..n {
                let (right, rs) = (dq[j * n + k], slack[j * n + k]);
                let p = [s.xs[i], s.xs[j], s.xs[k]];
                b.le(&p, s.gs[i], left, ls);
                b.le(&p, left, s.gs[j], ls);
                b.le(&p, s.gs[j], right, rs);
                b.le(&p, right, s.gs[k], rs);
            }
        }
    }
    b.finish()
}

/// Blended-point conditions: for `left`,
/// `f(l x + (1 - l) y) <= f(y) + l g(x) (x - y)`; otherwise
/// `f(l x + (1 - l) y) <= f(x) + (1 - l) g(y) (y - x)`.
/// Returns the full report and the one restricted to `0 < l < 1`.
fn blended<F: RealFn + ?Sized>(
    f: &F,
    s: &Sampled,
    lambdas: &[f64],
    left: bool,
    tol: &Tolerance,
) -> Result<(CheckReport, CheckReport)> {
    let name = if left { BLEND_LEFT } else { BLEND_RIGHT };
    let mut full = ReportBuilder::new(name);
    let mut open = ReportBuilder::new(format!("{name}_open_lambda"));
    for (i, j) in s.ordered_pairs() {
        let (x, y) = (s.xs[i], s.xs[j]);
        for &l in lambdas {
            let p = l * x + (1.0 - l) * y;
            // exact at the end weights
            let fp = if l == 1.0 {
                s.fs[i]
            } else if l == 0.0 {
                s.fs[j]
            } else {
                f.eval(p)?
            };
            let (base, step) = if left {
                (s.fs[j], l * s.gs[i] * (x - y))
            } else {
                (s.fs[i], (1.0 - l) * s.gs[j] * (y - x))
            };
            let slack = sum_slack(tol, &[fp, base, step]);
            let pts = [x, y, l];
            full.le(&pts, fp, base + step, slack);
            if l > 0.0 && l < 1.0 {
                open.le(&pts, fp, base + step, slack);
            }
        }
    }
    Ok((full.finish(), open.finish()))
}

fn assemble(reports: Vec<(CheckReport, Shape)>, open: Vec<CheckReport>) -> GConvexReport {
    let mut out = GConvexReport {
        passed: true,
        per_condition: BTreeMap::new(),
        open_lambda: BTreeMap::new(),
        consistency_alarm: false,
        witnesses: Vec::new(),
        conditions: BTreeMap::new(),
        notes: Vec::new(),
    };
    for (r, shape) in reports {
        out.passed &= r.passed;
        out.per_condition.insert(r.check.clone(), r.passed);
        out.witnesses.extend(witnesses_of(&r.check, &r, shape));
        out.conditions.insert(r.check.clone(), r);
    }
    for r in open {
        if r.evaluated > 0 {
            let name = r.check.trim_end_matches("_open_lambda").to_string();
            out.open_lambda.insert(name, r.passed);
        }
    }
    let verdicts: Vec<bool> = out.per_condition.values().copied().collect();
    if verdicts.windows(2).any(|w| w[0] != w[1]) {
        out.consistency_alarm = true;
        out.notes.push(format!(
            "consistency alarm: equivalent conditions disagree ({})",
            out.per_condition
                .iter()
                .map(|(k, v)| format!("{k}={}", if *v { "pass" } else { "fail" }))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    out
}

/// Checks the definition over all ordered grid pairs.
pub fn gconvex_check<F, G>(f: &F, g: &G, grid: &Grid, tol: &Tolerance) -> Result<GConvexReport>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let s = Sampled::new(f, g, grid)?;
    Ok(assemble(vec![(definition(&s, tol), Shape::Pair)], Vec::new()))
}

/// Checks the definition and all five equivalent characterizations; their
/// verdicts must agree, and a disagreement raises the consistency alarm.
pub fn equivalence_suite<F, G>(f: &F, g: &G, grid: &Grid, lambdas: &[f64], tol: &Tolerance) -> Result<GConvexReport>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidInput(format!("lambda {l} is outside [0, 1]")));
    }
    let lambdas = if lambdas.is_empty() {
        &DEFAULT_LAMBDAS[..]
    } else {
        lambdas
    };
    let s = Sampled::new(f, g, grid)?;
    let (left, left_open) = blended(f, &s, lambdas, true, tol)?;
    let (right, right_open) = blended(f, &s, lambdas, false, tol)?;
    let mut out = assemble(
        vec![
            (definition(&s, tol), Shape::Pair),
            (two_sided(&s, tol), Shape::Pair),
            (left, Shape::Blend),
            (quotient_sandwich(&s, tol), Shape::Pair),
            (right, Shape::Blend),
            (chain(&s, tol), Shape::Triple),
        ],
        vec![left_open, right_open],
    );
    if !lambdas.iter().any(|&l| l == 0.0 || l == 1.0) {
        out.notes.push(
            "no end weight among the lambdas: whether 0 < lambda < 1 alone characterizes g-convexity is open".into(),
        );
    }
    Ok(out)
}

/// `f = f_c + integral of g from c`, for increasing `g`. The result is
/// g-convex with `f(c) = f_c` exactly.
pub fn construct_from_quotient_bound<G: RealFn>(
    g: G,
    c: f64,
    f_c: f64,
    domain: Interval,
    window: (f64, f64),
) -> Result<Antiderivative<G>> {
    if !domain.contains_interior(c) {
        return Err(Error::Precondition(format!("c = {c} is not interior to {domain}")));
    }
    let probe = Grid::uniform(domain, 401, window, 1e-9, 1e-9)?;
    let mono = check_monotone(&g, &probe, &Tolerance::default())?;
    if !mono.passed {
        let w = mono
            .worst
            .as_ref()
            .map(|w| format!(" (g({}) > g({}))", w.points[0], w.points[1]));
        return Err(Error::Precondition(format!(
            "{} is not increasing on {domain}{}",
            g.describe(),
            w.unwrap_or_default()
        )));
    }
    Antiderivative::new(g, c, f_c, domain, window)
}

/// `a + b x <= f(x) <= a + x g(x)` with `a = f(0)` and `b = g(0)`.
pub fn sandwich_check<F, G>(f: &F, g: &G, grid: &Grid, tol: &Tolerance) -> Result<CheckReport>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    if !f.domain().contains_interior(0.0) {
        return Err(Error::Precondition(format!("0 is not interior to {}", f.domain())));
    }
    let (a, b0) = (f.eval(0.0)?, g.eval(0.0)?);
    let mut b = ReportBuilder::new("linear_sandwich");
    for &x in grid.points() {
        let (fx, gx) = (f.eval(x)?, g.eval(x)?);
        let (low, high) = (a + b0 * x, a + x * gx);
        let slack = sum_slack(tol, &[a, b0 * x, x * gx, fx]);
        b.le(&[x, 0.0], low, fx, slack);
        b.le(&[x, 1.0], fx, high, slack);
    }
    let mut r = b.finish();
    r.notes.push(format!(
        "a = f(0) = {a}, b = g(0) = {b0}; witness points are (x, 0) for the lower and (x, 1) for the upper bound"
    ));
    Ok(r)
}
