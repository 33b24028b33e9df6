use crate::calculus::{check_monotone_values, Direction, Grid, Tolerance};
use crate::error::{Error, EvalError, Result};
use crate::fnexpr::{eval_grid, Interval, RealFn};

const PROBES: usize = 257;
const MAX_EXPANSIONS: usize = 2000;
const MAX_STEPS: usize = 400;
const WIDTH: f64 = 1e-12;

/// Numeric inverse of a strictly monotone continuous `h`: `eval(t)` is the
/// `s` in `search` with `h(s) = t`. A bracket is located on the probe grid
/// or by doubling outward from it, then shrunk to a relative width of
/// 1e-12 by safeguarded false position.
#[derive(Debug, Clone)]
pub struct Inverse<H> {
    h: H,
    search: Interval,
    domain: Interval,
    increasing: bool,
    probes: Vec<(f64, f64)>,
}

impl<H: RealFn> Inverse<H> {
    /// Verifies strict monotonicity of `h` on a probe grid of `search`
    /// (cut to `window`) before accepting it.
    pub fn new(h: H, search: Interval, domain: Interval, window: (f64, f64)) -> Result<Self> {
        let grid = Grid::uniform(search, PROBES, window, 1e-9, 1e-9)?;
        let values = eval_grid(&h, &grid)?;
        let increasing = values[values.len() - 1] >= values[0];
        let dir = if increasing {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
        let tol = Tolerance::default();
        let mono = check_monotone_values(grid.points(), &values, dir, &tol);
        let flat = values.windows(2).position(|w| w[0] == w[1]);
        if !mono.passed || flat.is_some() {
            let at = flat
                .map(|k| grid.points()[k])
                .or_else(|| mono.worst.as_ref().map(|w| w.points[0]))
                .unwrap_or(f64::NAN);
            return Err(Error::Precondition(format!(
                "{} is not strictly monotone on {search} (near {at})",
                h.describe()
            )));
        }
        let probes = grid.points().iter().copied().zip(values).collect();
        Ok(Self {
            h,
            search,
            domain,
            increasing,
            probes,
        })
    }

    pub fn forward(&self) -> &H {
        &self.h
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// `h(s) - t`, oriented so that it increases with `s`.
    fn residual(&self, s: f64, t: f64) -> Result<f64, EvalError> {
        let r = self.h.eval(s)? - t;
        Ok(if self.increasing { r } else { -r })
    }

    fn fail(&self, t: f64) -> EvalError {
        EvalError::Numeric(format!(
            "no bracket for {t} in the range of {} over {}",
            self.h.describe(),
            self.search
        ))
    }

    /// Walks outward from `start` by doubling steps until the residual
    /// changes sign; approaches a finite end of `search` geometrically.
    fn expand(&self, t: f64, start: f64, step: f64, dir: f64) -> Result<(f64, f64), EvalError> {
        let end = if dir < 0.0 { self.search.lo() } else { self.search.hi() };
        let (mut inner, mut d) = (start, step);
        for _ in 0..MAX_EXPANSIONS {
            let mut outer = inner + dir * d;
            if (dir < 0.0 && outer <= end) || (dir > 0.0 && outer >= end) {
                outer = if self.search.contains(end) {
                    end
                } else {
                    0.5 * (inner + end)
                };
            }
            if outer == inner || !outer.is_finite() {
                break;
            }
            let r = self.residual(outer, t)?;
            if (dir > 0.0 && r >= 0.0) || (dir < 0.0 && r <= 0.0) {
                return Ok(if dir > 0.0 { (inner, outer) } else { (outer, inner) });
            }
            if outer == end {
                break;
            }
            inner = outer;
            d *= 2.0;
        }
        Err(self.fail(t))
    }
}

impl<H: RealFn> RealFn for Inverse<H> {
    fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(t) {
            return Err(EvalError::OutOfDomain {
                x: t,
                domain: self.domain,
            });
        }
        let oriented = |v: f64| if self.increasing { v - t } else { t - v };
        let first = self.probes[0];
        let last = self.probes[self.probes.len() - 1];
        let spacing = self.probes[1].0 - first.0;
        let (mut lo, mut hi) = if oriented(first.1) > 0.0 {
            self.expand(t, first.0, spacing, -1.0)?
        } else if oriented(last.1) < 0.0 {
            self.expand(t, last.0, spacing, 1.0)?
        } else {
            let k = self.probes.partition_point(|p| oriented(p.1) < 0.0);
            if oriented(self.probes[k].1) == 0.0 {
                return Ok(self.probes[k].0);
            }
            (self.probes[k - 1].0, self.probes[k].0)
        };
        // Illinois false position, with a bisection step whenever two
        // steps in a row fail to halve the bracket
        let (mut rlo, mut rhi) = (self.residual(lo, t)?, self.residual(hi, t)?);
        let (mut kept, mut slow) = (0i8, 0u8);
        for _ in 0..MAX_STEPS {
            let width = hi - lo;
            let mid = 0.5 * (lo + hi);
            if width <= WIDTH * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            let mut s = if slow >= 2 { mid } else { hi - rhi * width / (rhi - rlo) };
            if !(s > lo && s < hi) {
                s = mid;
            }
            let r = self.residual(s, t)?;
            if r == 0.0 {
                return Ok(s);
            }
            if r < 0.0 {
                lo = s;
                rlo = r;
                if kept == 1 {
                    rhi *= 0.5;
                }
                kept = 1;
            } else {
                hi = s;
                rhi = r;
                if kept == -1 {
                    rlo *= 0.5;
                }
                kept = -1;
            }
            slow = if hi - lo > 0.5 * width { slow + 1 } else { 0 };
            if slow > 2 {
                slow = 0;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        format!("inverse of {}", self.h.describe())
    }
}
