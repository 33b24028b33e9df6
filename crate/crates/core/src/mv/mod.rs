//! Mean-value functions: witness search, grid checks, strict-mean
//! recovery and pointwise generators.
//!
//! `g` is a mean-value function of `f` when every pair `x != y` has some
//! `c` strictly between them with `f(y) - f(x) = g(c) (y - x)`.

mod pointwise;
mod search;

pub use pointwise::{
    mu_equation_check, ode_residual, ode_residual_check, pointwise_mv_check, pointwise_mv_generate, PointwiseMv,
    PointwiseMvSpec,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::calculus::{difference_quotient, Grid, Tolerance};
use crate::error::{Error, Result};
use crate::fnexpr::RealFn;
use crate::report::{CheckReport, ReportBuilder, Witness};

/// Certificate for one pair: `min(x, y) < c < max(x, y)` and
/// `|g(c) - dq|` within the tolerance it was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvWitness {
    pub x: f64,
    pub y: f64,
    pub c: f64,
    pub dq: f64,
    pub g_at_c: f64,
}

/// A sample of the mean `eta(x, y) = lambda x + (1 - lambda) y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFunctionSample {
    pub x: f64,
    pub y: f64,
    pub eta: f64,
    pub lambda: f64,
}

impl MeanFunctionSample {
    pub fn new(x: f64, y: f64, eta: f64) -> Self {
        Self {
            x,
            y,
            eta,
            lambda: (y - eta) / (y - x),
        }
    }

    /// `mu = 1 - lambda`, the weight in `eta = x + (y - x) mu`.
    pub fn mu(&self) -> f64 {
        1.0 - self.lambda
    }
}

impl From<&MvWitness> for MeanFunctionSample {
    fn from(w: &MvWitness) -> Self {
        Self::new(w.x, w.y, w.c)
    }
}

/// Result of a grid-wide mean-value check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MvCheck {
    pub report: CheckReport,
    pub witnesses: Vec<MvWitness>,
    pub samples: Vec<MeanFunctionSample>,
}

impl MvCheck {
    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

/// Searches `(min(x, y), max(x, y))` for a mean-value point of `g`.
pub fn mv_witness<F, G>(f: &F, g: &G, x: f64, y: f64, tol: &Tolerance) -> Result<Option<MvWitness>>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let dq = difference_quotient(f, x, y)?;
    let best = search::find_mean_point(g, x.min(y), x.max(y), dq, tol.slack(dq));
    Ok(best.and_then(|(c, gc)| {
        ((gc - dq).abs() <= tol.slack(dq)).then_some(MvWitness {
            x,
            y,
            c,
            dq,
            g_at_c: gc,
        })
    }))
}

/// Pairs to test on an `n`-point grid: everything when `n <= 64`, else a
/// deterministic stratified subset of `budget` pairs that always contains
/// adjacent pairs and pairs reaching the grid ends.
pub(crate) fn select_pairs(n: usize, budget: usize) -> Vec<(usize, usize)> {
    let total = n * n.saturating_sub(1) / 2;
    if n <= 64 || total <= budget {
        return (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    }
    let mut chosen = std::collections::BTreeSet::new();
    for i in 0..n - 1 {
        chosen.insert((i, i + 1));
        chosen.insert((0, i + 1));
        chosen.insert((i, n - 1));
    }
    // row starts of the lexicographic pair enumeration
    let starts: Vec<usize> = (0..n)
        .scan(0, |acc, i| {
            let s = *acc;
            *acc += n - 1 - i;
            Some(s)
        })
        .collect();
    let remaining = budget.saturating_sub(chosen.len());
    let pair_at = |idx: usize| {
        let i = starts.partition_point(|&s| s <= idx) - 1;
        (i, i + 1 + (idx - starts[i]))
    };
    // one pair per stratum, then the next offset in every stratum, until
    // collisions with the edge pairs are made up
    let stratum = |k: usize| k * total / remaining;
    let mut offset = 0;
    while chosen.len() < budget {
        for k in 0..remaining {
            let idx = stratum(k) + offset;
            if idx < stratum(k + 1) {
                chosen.insert(pair_at(idx));
                if chosen.len() == budget {
                    break;
                }
            }
        }
        offset += 1;
    }
    chosen.into_iter().collect()
}

pub(crate) const PAIR_BUDGET: usize = 4096;

fn check_pairs<F, G>(
    name: &str,
    f: &F,
    g: &G,
    pairs: impl IntoIterator<Item = (f64, f64)>,
    tol: &Tolerance,
) -> Result<MvCheck>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let mut b = ReportBuilder::new(name);
    let mut witnesses = Vec::new();
    for (x, y) in pairs {
        let dq = difference_quotient(f, x, y)?;
        b.count();
        match search::find_mean_point(g, x.min(y), x.max(y), dq, tol.slack(dq)) {
            Some((c, gc)) if (gc - dq).abs() <= tol.slack(dq) => witnesses.push(MvWitness {
                x,
                y,
                c,
                dq,
                g_at_c: gc,
            }),
            best => {
                let (c, gc) = best.unwrap_or((f64::NAN, f64::NAN));
                b.violation(Witness {
                    points: vec![x, y, c],
                    lhs: dq,
                    rhs: gc,
                    margin: -(gc - dq).abs(),
                    slack: tol.slack(dq),
                });
            }
        }
    }
    if !b.passed() {
        b.note("witness points list (x, y, closest c); lhs is the difference quotient, rhs is g at the closest c");
    }
    let samples = witnesses.iter().map(MeanFunctionSample::from).collect();
    Ok(MvCheck {
        report: b.finish(),
        witnesses,
        samples,
    })
}

/// Checks the mean-value relation on grid pairs (all pairs for small
/// grids, a stratified subset otherwise).
pub fn mv_check<F, G>(f: &F, g: &G, grid: &Grid, tol: &Tolerance) -> Result<MvCheck>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    let xs = grid.points();
    let pairs = select_pairs(xs.len(), PAIR_BUDGET);
    let mut out = check_pairs("mv_function", f, g, pairs.iter().map(|&(i, j)| (xs[i], xs[j])), tol)?;
    if pairs.len() < xs.len() * (xs.len() - 1) / 2 {
        out.report
            .notes
            .push(format!("checked a stratified subset of {} grid pairs", pairs.len()));
    }
    Ok(out)
}

/// Verifies that samples describe a strict mean: `min < eta < max`, with
/// `lambda` in `(0, 1)` reproducing `eta` in both weighted forms.
pub fn strict_mean_check(samples: &[MeanFunctionSample], tol: &Tolerance) -> Result<CheckReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "strict_mean_check needs at least one sample".into(),
        ));
    }
    let mut b = ReportBuilder::new("strict_mean");
    let mut fragile = 0usize;
    for s in samples {
        let (lo, hi) = (s.x.min(s.y), s.x.max(s.y));
        if !(s.x != s.y && s.eta.is_finite() && s.lambda.is_finite()) {
            b.violation(Witness {
                points: vec![s.x, s.y, s.eta],
                lhs: s.eta,
                rhs: s.lambda,
                margin: f64::NEG_INFINITY,
                slack: 0.0,
            });
            continue;
        }
        let gap = (s.eta - lo).min(hi - s.eta);
        b.count();
        if !(lo < s.eta && s.eta < hi && 0.0 < s.lambda && s.lambda < 1.0) {
            b.violation(Witness {
                points: vec![s.x, s.y, s.eta],
                lhs: s.eta,
                rhs: s.lambda,
                margin: gap,
                slack: 0.0,
            });
            continue;
        }
        if gap < tol.strict_margin * (hi - lo) {
            fragile += 1;
        }
        let slack = tol.abs_tol + tol.rel_tol * lo.abs().max(hi.abs());
        let lambda_form = s.lambda * s.x + (1.0 - s.lambda) * s.y;
        let mu_form = s.x + (s.y - s.x) * s.mu();
        b.close(&[s.x, s.y, s.eta], lambda_form, s.eta, slack);
        b.close(&[s.x, s.y, s.eta], mu_form, s.eta, slack);
    }
    if fragile > 0 {
        b.note(format!(
            "{fragile} samples lie within strict_margin of an endpoint (strictness not robust)"
        ));
    }
    Ok(b.finish())
}

/// Exact midpoint of two distinct rationals: a rational strictly between
/// them, so the indicator of the rationals takes the value 1 there, which
/// equals every difference quotient of the identity.
pub fn rational_mean_witness(x: &BigRational, y: &BigRational) -> Result<BigRational> {
    if x == y {
        return Err(Error::InvalidInput(format!("degenerate rational pair {x}")));
    }
    Ok((x + y) / BigRational::from_integer(BigInt::from(2)))
}
