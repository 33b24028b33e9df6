use serde::Serialize;

use crate::error::{Error, EvalError, Result};
use crate::fnexpr::{Interval, RealFn};

const MIN_STEPS: usize = 4096;
const MAX_STEPS: usize = 1 << 21;
/// Allowed step-doubling error per unit of `max(1, |f|)`.
pub const STEP_ERROR: f64 = 1e-10;

/// Fixed-step classical Runge-Kutta solution on a closed range, with
/// cubic Hermite dense output between nodes.
#[derive(Debug, Clone, Serialize)]
pub struct OdeSolution {
    #[serde(skip)]
    ts: Vec<f64>,
    #[serde(skip)]
    ys: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    #[serde(skip)]
    domain: Interval,
    pub steps: usize,
    /// Largest step-doubling difference divided by 15.
    pub error_estimate: f64,
}

fn rk4_march<R>(rhs: &R, t0: f64, y0: f64, t1: f64, n: usize) -> Result<Vec<(f64, f64)>>
where
    R: Fn(f64, f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(n + 1);
    out.push((t0, y0));
    if n == 0 {
        return Ok(out);
    }
    let h = (t1 - t0) / n as f64;
    let (mut t, mut y) = (t0, y0);
    for i in 1..=n {
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)?;
        let k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)?;
        let k4 = rhs(t + h, y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // node times from the index, not by accumulation
        t = if i == n { t1 } else { t0 + i as f64 * h };
        if !y.is_finite() {
            return Err(Error::Numeric(format!("solution overflowed near t = {t}")));
        }
        out.push((t, y));
    }
    Ok(out)
}

/// Nodes from `lo` to `hi` through `(t0, y0)`, with `left` steps below
/// `t0` and `right` steps above.
fn solve_on<R>(rhs: &R, lo: f64, hi: f64, t0: f64, y0: f64, (left, right): (usize, usize)) -> Result<Vec<(f64, f64)>>
where
    R: Fn(f64, f64) -> Result<f64>,
{
    let mut back = rk4_march(rhs, t0, y0, lo, left)?;
    back.reverse();
    back.pop();
    back.extend(rk4_march(rhs, t0, y0, hi, right)?);
    Ok(back)
}

impl OdeSolution {
    /// Solves `y' = rhs(t, y)` with `y(t0) = y0` on `[lo, hi]`, doubling the
    /// step count from 4096 until two successive solutions agree to within
    /// the step error allowance.
    pub fn solve(rhs: impl Fn(f64, f64) -> Result<f64>, lo: f64, hi: f64, t0: f64, y0: f64) -> Result<Self> {
        if !(lo <= t0 && t0 <= hi && lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t0 = {t0} must lie in a finite range [{lo}, {hi}]"
            )));
        }
        let h = (hi - lo) / MIN_STEPS as f64;
        let mut counts = (((t0 - lo) / h).ceil() as usize, ((hi - t0) / h).ceil() as usize);
        let mut coarse = solve_on(&rhs, lo, hi, t0, y0, counts)?;
        loop {
            counts = (2 * counts.0, 2 * counts.1);
            let fine = solve_on(&rhs, lo, hi, t0, y0, counts)?;
            // coarse node j sits at fine node 2 j
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for (j, &(_, y)) in coarse.iter().enumerate() {
                let yf = fine[2 * j].1;
                let diff = (yf - y).abs() / 15.0;
                worst = worst.max(diff);
                ok &= diff <= STEP_ERROR * yf.abs().max(1.0);
            }
            if ok {
                let slopes = fine.iter().map(|&(t, y)| rhs(t, y)).collect::<Result<Vec<_>>>()?;
                let (ts, ys) = fine.into_iter().unzip();
                return Ok(Self {
                    ts,
                    ys,
                    slopes,
                    domain: Interval::closed(lo, hi)?,
                    steps: counts.0 + counts.1,
                    error_estimate: worst,
                });
            }
            if counts.0 + counts.1 > MAX_STEPS {
                return Err(Error::Numeric(format!(
                    "step-doubling error {worst:e} still above {STEP_ERROR:e} at {} steps",
                    counts.0 + counts.1
                )));
            }
            coarse = fine;
        }
    }
}

impl RealFn for OdeSolution {
    fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(t) {
            return Err(EvalError::OutOfDomain {
                x: t,
                domain: self.domain,
            });
        }
        let k = self.ts.partition_point(|&s| s <= t).clamp(1, self.ts.len() - 1) - 1;
        let (t0, t1) = (self.ts[k], self.ts[k + 1]);
        if t == t0 {
            return Ok(self.ys[k]);
        }
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1, d0, d1) = (self.ys[k], self.ys[k + 1], self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        format!("Runge-Kutta solution on {} with {} steps", self.domain, self.steps)
    }
}
