use super::{Side, SidedValue, Tolerance};
use crate::error::{Error, Result};
use crate::fnexpr::RealFn;

const HALVINGS: usize = 6;
const LIMIT_STEPS: usize = 9;
const WIDENINGS: i32 = 6;
const NARROWINGS: i32 = 8;

fn base_step(x: f64) -> f64 {
    1e-5_f64.max(1e-5 * x.abs())
}

/// Shrinks `h` so that `x + side * reach * h` stays inside the domain.
fn fit_step<F: RealFn + ?Sized>(f: &F, x: f64, side: Side, h: f64, reach: f64) -> Result<f64> {
    let dom = f.domain();
    if !dom.contains_interior(x) {
        return Err(Error::Precondition(format!(
            "{x} is not interior to {dom} of {}",
            f.describe()
        )));
    }
    let (room, closed) = match side {
        Side::Right => (dom.hi() - x, dom.hi_closed()),
        Side::Left => (x - dom.lo(), dom.lo_closed()),
    };
    let cap = if closed { room / reach } else { 0.99 * room / reach };
    Ok(h.min(cap))
}

/// One-sided derivative by a second-order one-sided difference and a
/// Richardson table over six step halvings.
///
/// Tables are built from the base step, from base steps widened by powers
/// of 4 while they fit in the domain, and from base steps narrowed by
/// powers of 4. Every entry is scored by its
/// disagreement with its neighbours plus the rounding noise of its step;
/// the best-scoring entry is returned with that score as the error
/// estimate. Widening matters where the function is nearly affine, so that
/// rounding rather than truncation dominates; narrowing matters next to a
/// kink that the base steps would straddle.
pub fn one_sided_derivative<F: RealFn + ?Sized>(f: &F, x: f64, side: Side) -> Result<SidedValue> {
    let base = base_step(x);
    let h0 = fit_step(f, x, side, base, 2.0)?;
    let fx = f.eval(x)?;
    let mut best = richardson(f, x, side, fx, h0)?;
    if h0 == base {
        for m in 1..=WIDENINGS {
            let wide = base * 4f64.powi(m);
            if fit_step(f, x, side, wide, 2.0)? < wide {
                break;
            }
            match richardson(f, x, side, fx, wide) {
                Ok(cand) if cand.1 < best.1 => best = cand,
                Ok(_) => {}
                Err(_) => break,
            }
        }
    }
    for m in 1..=NARROWINGS {
        let cand = richardson(f, x, side, fx, h0 * 0.25f64.powi(m))?;
        if cand.1 < best.1 {
            best = cand;
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Numeric(format!(
            "one-sided derivative of {} at {x} is not finite",
            f.describe()
        )));
    }
    Ok(SidedValue {
        point: x,
        side,
        value: best.0,
        est_error: best.1,
    })
}

/// Best `(value, score)` of one Richardson table started at step `h0`.
fn richardson<F: RealFn + ?Sized>(f: &F, x: f64, side: Side, fx: f64, h0: f64) -> Result<(f64, f64)> {
    let s = side.sign();
    let mut table = [[0.0f64; HALVINGS + 1]; HALVINGS + 1];
    let mut noise = [0.0f64; HALVINGS + 1];
    for i in 0..=HALVINGS {
        let h = h0 / (1u32 << i) as f64;
        let x1 = x + s * h;
        let x2 = x + s * 2.0 * h;
        // exact representable step
        let h = (x1 - x) * s;
        let (f1, f2) = (f.eval(x1)?, f.eval(x2)?);
        table[i][0] = s * (4.0 * (f1 - fx) - (f2 - fx)) / (2.0 * h);
        noise[i] = f64::EPSILON * (3.0 * fx.abs() + 4.0 * f1.abs() + f2.abs()) / h;
        for j in 1..=i {
            let factor = (1u64 << (j + 1)) as f64 - 1.0;
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / factor;
        }
    }
    let mut best = (table[0][0], f64::INFINITY);
    for i in 1..=HALVINGS {
        for j in 1..=i {
            let v = table[i][j];
            let err = (v - table[i][j - 1]).abs().max((v - table[i - 1][j - 1]).abs()) + noise[i];
            if err < best.1 {
                best = (v, err);
            }
        }
    }
    Ok(best)
}

/// One-sided limit of `g` at `x` along steps `h0 * 4^-k`, accelerated by
/// Aitken's delta-squared process. The returned term is the one closest to
/// its predecessor. Piecewise-constant tails are returned exactly.
pub fn one_sided_limit<F: RealFn + ?Sized>(g: &F, x: f64, side: Side) -> Result<SidedValue> {
    let h0 = fit_step(g, x, side, base_step(x), 1.0)?;
    let s = side.sign();
    let mut seq = [0.0f64; LIMIT_STEPS];
    for (k, v) in seq.iter_mut().enumerate() {
        let h = h0 / 4f64.powi(k as i32);
        *v = g.eval(x + s * h)?;
    }
    let aitken = |k: usize| -> f64 {
        let (a, b, c) = (seq[k], seq[k + 1], seq[k + 2]);
        let den = c - 2.0 * b + a;
        let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
        if den.abs() <= 1e-13 * scale {
            return c;
        }
        let acc = a - (b - a) * (b - a) / den;
        // reject corrections far beyond the observed tail
        if (acc - c).abs() > 2.0 * (c - b).abs() + 1e-15 * scale {
            c
        } else {
            acc
        }
    };
    // consecutive accelerated terms that agree best; small steps lose
    // digits to cancellation in quotient-like functions
    let mut best = (aitken(1), (aitken(1) - aitken(0)).abs());
    for k in 2..LIMIT_STEPS - 2 {
        let (a, prev) = (aitken(k), aitken(k - 1));
        if (a - prev).abs() < best.1 {
            best = (a, (a - prev).abs());
        }
    }
    Ok(SidedValue {
        point: x,
        side,
        value: best.0,
        est_error: best.1,
    })
}

/// Derivative from agreeing one-sided derivatives; `None` when they differ
/// by more than the tolerance plus their error estimates.
pub fn central_derivative<F: RealFn + ?Sized>(f: &F, x: f64, tol: &Tolerance) -> Result<Option<SidedValue>> {
    let l = one_sided_derivative(f, x, Side::Left)?;
    let r = one_sided_derivative(f, x, Side::Right)?;
    let scale = l.value.abs().max(r.value.abs());
    if (l.value - r.value).abs() > tol.slack(scale) + l.est_error + r.est_error {
        return Ok(None);
    }
    Ok(Some(SidedValue {
        point: x,
        side: Side::Right,
        value: 0.5 * (l.value + r.value),
        est_error: l.est_error.max(r.est_error) + 0.5 * (l.value - r.value).abs(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnexpr::{Interval, RealFunction};
    use proptest::prelude::*;

    fn f(src: &str) -> RealFunction {
        RealFunction::on_reals(src).unwrap()
    }

    #[test]
    fn abs_has_unit_one_sided_derivatives_at_zero() {
        let r = one_sided_derivative(&f("abs(x)"), 0.0, Side::Right).unwrap();
        let l = one_sided_derivative(&f("abs(x)"), 0.0, Side::Left).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        assert!((l.value + 1.0).abs() < 1e-12, "{l:?}");
    }

    #[test]
    fn smooth_point_agrees_on_both_sides() {
        for side in [Side::Left, Side::Right] {
            let d = one_sided_derivative(&f("x^2"), 1.0, side).unwrap();
            assert!((d.value - 2.0).abs() < 1e-10, "{d:?}");
            let e = one_sided_derivative(&f("exp(x)"), 1.0, side).unwrap();
            assert!((e.value - std::f64::consts::E).abs() < 1e-8, "{e:?}");
        }
        let c = central_derivative(&f("x^2"), 1.0, &Tolerance::default())
            .unwrap()
            .unwrap();
        assert!((c.value - 2.0).abs() < 1e-10);
        assert!(central_derivative(&f("abs(x)"), 0.0, &Tolerance::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn limits_of_sign_and_identity() {
        let sgn = f("sgn(x)");
        let r = one_sided_limit(&sgn, 0.0, Side::Right).unwrap();
        let l = one_sided_limit(&sgn, 0.0, Side::Left).unwrap();
        assert_eq!((r.value, r.est_error), (1.0, 0.0));
        assert_eq!((l.value, l.est_error), (-1.0, 0.0));
        for side in [Side::Left, Side::Right] {
            let v = one_sided_limit(&f("x"), 0.5, side).unwrap();
            assert!((v.value - 0.5).abs() < 1e-14, "{v:?}");
        }
    }

    #[test]
    fn steps_stay_inside_open_domains() {
        let log = RealFunction::parse("log(x)", Interval::open(0.0, 1.0).unwrap()).unwrap();
        let d = one_sided_derivative(&log, 1e-7, Side::Left).unwrap();
        assert!((d.value - 1e7).abs() / 1e7 < 1e-3, "{d:?}");
        let d = one_sided_derivative(&log, 1.0 - 1e-9, Side::Right).unwrap();
        assert!((d.value - 1.0).abs() < 1e-4, "{d:?}");
        assert!(one_sided_derivative(&log, 1.0, Side::Right).is_err());
    }

    proptest! {
        #[test]
        fn affine_derivatives_are_exact(a in -10.0f64..10.0, b in -10.0f64..10.0, x in -10.0f64..10.0) {
            let g = RealFunction::on_reals(&format!("{a} * x + {b}").replace("+ -", "- ")).unwrap();
            for side in [Side::Left, Side::Right] {
                let d = one_sided_derivative(&g, x, side).unwrap();
                prop_assert!((d.value - a).abs() <= 1e-10, "a = {}, got {:?}", a, d);
            }
        }
    }
}
