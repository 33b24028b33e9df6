use std::cell::Cell;

use serde::Serialize;

use super::Tolerance;
use crate::error::{Error, Result};
use crate::fnexpr::RealFn;

/// Evaluation budget per integral.
const MAX_EVALS: usize = 1 << 22;
/// Panels this deep are accepted as they stand; their width is at most
/// `2^-50` of the whole range.
const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local extrapolation corrections.
    pub error_estimate: f64,
    /// Bound for monotone integrands: the sum over accepted panels of
    /// `width * (max g - min g)` over the panel's samples.
    pub error_bound: f64,
    pub panels: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    /// g at the quarter, middle and three-quarter points
    q: [f64; 3],
    whole: f64,
    depth: u32,
}

/// Open three-point rule (Milne), exact for cubics; never touches the
/// panel endpoints, so open domains are fine.
fn milne(w: f64, q: &[f64; 3]) -> f64 {
    w * (2.0 * q[0] - q[1] + 2.0 * q[2]) / 3.0
}

/// Largest fourth difference of nine equally spaced samples. Cubics give
/// zero; a jump of size `d` anywhere among the samples gives at least `d`,
/// even where the rule's two estimates happen to agree.
fn fourth_difference(run: &[f64; 9]) -> f64 {
    run.windows(5)
        .map(|v| (v[0] - 4.0 * v[1] + 6.0 * v[2] - 4.0 * v[3] + v[4]).abs())
        .fold(0.0, f64::max)
}

/// Signed integral of a monotone integrand over `[a, b]`.
///
/// Adaptive bisection with a Milne rule; a panel is accepted when halving
/// changes its estimate by less than its share of the tolerance. Jumps
/// are localized by bisection down to `MAX_DEPTH`. Swapping `a` and `b`
/// flips the sign.
pub fn integrate_monotone<F: RealFn + ?Sized>(g: &F, a: f64, b: f64, tol: &Tolerance) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            error_bound: 0.0,
            panels: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = hi - lo;
    let dom = g.domain();
    let end_value = |t: f64| if dom.contains(t) { g.eval(t).ok() } else { None };
    let evals = Cell::new(0usize);
    let eval = |t: f64| -> Result<f64> {
        evals.set(evals.get() + 1);
        Ok(g.eval(t)?)
    };

    let q = [
        eval(lo + 0.25 * width)?,
        eval(lo + 0.5 * width)?,
        eval(lo + 0.75 * width)?,
    ];
    let mut stack = vec![Panel {
        lo,
        hi,
        q,
        whole: milne(width, &q),
        depth: 0,
    }];
    // rough total scale for the relative part of the tolerance
    let scale = (q.iter().map(|v| v.abs()).fold(0.0, f64::max) * width).max(f64::MIN_POSITIVE);
    let slack = tol.slack(scale);

    let (mut value, mut estimate, mut bound, mut panels) = (0.0, 0.0, 0.0, 0usize);
    while let Some(p) = stack.pop() {
        let w = p.hi - p.lo;
        let mid = p.lo + 0.5 * w;
        let left_q = [eval(p.lo + 0.125 * w)?, p.q[0], eval(p.lo + 0.375 * w)?];
        let right_q = [eval(p.lo + 0.625 * w)?, p.q[2], eval(p.lo + 0.875 * w)?];
        let (left, right) = (milne(0.5 * w, &left_q), milne(0.5 * w, &right_q));
        let diff = left + right - p.whole;
        let share = slack * (w / width);
        // unevaluable range ends are stood in for by a point just inside
        let end = |t: f64, inward: f64| -> Result<f64> {
            match (t == lo || t == hi).then(|| end_value(t)).flatten() {
                Some(v) => Ok(v),
                None if t != lo && t != hi => eval(t),
                None => eval(t + inward * w / 1024.0),
            }
        };
        let run = [
            end(p.lo, 1.0)?,
            left_q[0],
            p.q[0],
            left_q[2],
            p.q[1],
            right_q[0],
            p.q[2],
            right_q[2],
            end(p.hi, -1.0)?,
        ];
        let smooth = diff.abs() <= 15.0 * share && fourth_difference(&run) * w <= 15.0 * share;
        if smooth || p.depth >= MAX_DEPTH {
            value += left + right + diff / 15.0;
            estimate += diff.abs() / 15.0;
            let gmin = run.iter().fold(f64::INFINITY, |m, v| m.min(*v));
            let gmax = run.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            bound += w * (gmax - gmin);
            panels += 1;
        } else {
            if evals.get() >= MAX_EVALS {
                return Err(Error::Numeric(format!(
                    "integral of {} over [{lo}, {hi}] exhausted its budget; estimate so far {value:e}, achieved bound {bound:e}",
                    g.describe()
                )));
            }
            // right pushed first so panels are accepted left to right
            stack.push(Panel {
                lo: mid,
                hi: p.hi,
                q: right_q,
                whole: right,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                lo: p.lo,
                hi: mid,
                q: left_q,
                whole: left,
                depth: p.depth + 1,
            });
        }
    }
    Ok(Integral {
        value: sign * value,
        error_estimate: estimate,
        error_bound: bound,
        panels,
    })
}
