//! Search for `c` in an open interval with `g(c)` equal to a target.

use crate::fnexpr::RealFn;

const PROBES: usize = 33;
const SCAN: usize = 1024;
const GOLDEN_STEPS: usize = 120;
const BISECT_STEPS: usize = 200;

/// Best candidate so far; ties go to the smaller `c`.
#[derive(Debug, Clone, Copy)]
struct Best {
    c: f64,
    gc: f64,
    err: f64,
}

impl Best {
    fn none() -> Self {
        Self {
            c: f64::NAN,
            gc: f64::NAN,
            err: f64::INFINITY,
        }
    }

    fn offer(&mut self, c: f64, gc: f64, target: f64) {
        let err = (gc - target).abs();
        if err < self.err || (err == self.err && c < self.c) {
            *self = Self { c, gc, err };
        }
    }

    fn get(self) -> Option<(f64, f64)> {
        self.err.is_finite().then_some((self.c, self.gc))
    }
}

fn samples<G: RealFn + ?Sized>(g: &G, lo: f64, hi: f64, n: usize) -> Vec<(f64, Option<f64>)> {
    let step = (hi - lo) / (n + 1) as f64;
    (1..=n)
        .map(|k| {
            let t = lo + k as f64 * step;
            (t, g.eval(t).ok())
        })
        .filter(|(t, _)| *t > lo && *t < hi)
        .collect()
}

/// Bisection on `g - target` between `a` and `b`, which bracket a sign
/// change. Every evaluated point is offered to `best`.
fn bisect<G: RealFn + ?Sized>(g: &G, target: f64, mut a: f64, mut ra: f64, mut b: f64, best: &mut Best) {
    for _ in 0..BISECT_STEPS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let Ok(gm) = g.eval(m) else { break };
        best.offer(m, gm, target);
        let rm = gm - target;
        if rm == 0.0 {
            break;
        }
        if (rm < 0.0) == (ra < 0.0) {
            a = m;
            ra = rm;
        } else {
            b = m;
        }
    }
}

fn sign_change(r0: f64, r1: f64) -> bool {
    (r0 <= 0.0 && r1 >= 0.0) || (r0 >= 0.0 && r1 <= 0.0)
}

/// Finds the point of `(lo, hi)` (clipped to the domain of `g`) where `g`
/// is closest to `target`.
///
/// Monotone `g` (judged on 33 probes) is handled by bisection between the
/// bracketing probes. Otherwise, or if that misses, a 1024-point scan is
/// followed by bisection at the first sign change and a golden-section
/// refinement around the best scan point.
///
/// Returns early once a candidate is within `accept` of the target.
pub(super) fn find_mean_point<G: RealFn + ?Sized>(
    g: &G,
    lo: f64,
    hi: f64,
    target: f64,
    accept: f64,
) -> Option<(f64, f64)> {
    let dom = g.domain();
    let (clo, chi) = (lo.max(dom.lo()), hi.min(dom.hi()));
    if !(clo < chi) {
        return None;
    }
    let mut best = Best::none();
    // a closed end of g's domain strictly inside (lo, hi) is a candidate
    // too, and brackets like any sample
    let end_value = |end: f64, clipped: bool| (clipped && dom.contains(end)).then(|| g.eval(end).ok()).flatten();
    let ends = [end_value(clo, clo > lo), end_value(chi, chi < hi)];
    for (end, v) in [clo, chi].into_iter().zip(ends) {
        if let Some(v) = v {
            best.offer(end, v, target);
        }
    }
    if best.err <= accept {
        return best.get();
    }
    let (lo, hi) = (clo, chi);
    let with_ends = |mut inner: Vec<(f64, Option<f64>)>| {
        if let Some(v) = ends[0] {
            inner.insert(0, (lo, Some(v)));
        }
        if let Some(v) = ends[1] {
            inner.push((hi, Some(v)));
        }
        inner
    };

    let probes = with_ends(samples(g, lo, hi, PROBES));
    if probes.len() >= PROBES && probes.iter().all(|(_, v)| v.is_some()) {
        let vals: Vec<f64> = probes.iter().map(|(_, v)| v.unwrap()).collect();
        let up = vals.windows(2).all(|w| w[0] <= w[1]);
        let down = vals.windows(2).all(|w| w[0] >= w[1]);
        for (t, v) in probes.iter().zip(&vals) {
            best.offer(t.0, *v, target);
        }
        if up || down {
            let bracket = (0..vals.len() - 1).find(|&k| sign_change(vals[k] - target, vals[k + 1] - target));
            if let Some(k) = bracket {
                let r = vals[k] - target;
                if r != 0.0 {
                    bisect(g, target, probes[k].0, r, probes[k + 1].0, &mut best);
                }
                if best.err <= accept {
                    return best.get();
                }
            }
        }
    }

    let scan = with_ends(samples(g, lo, hi, SCAN));
    let mut best_idx = None;
    let mut best_scan = Best::none();
    for (k, (t, v)) in scan.iter().enumerate() {
        if let Some(v) = v {
            best.offer(*t, *v, target);
            let before = best_scan.err;
            best_scan.offer(*t, *v, target);
            if best_scan.err < before {
                best_idx = Some(k);
            }
        }
    }
    if best.err == 0.0 {
        return best.get();
    }
    let first_change = scan.windows(2).find_map(|w| match (w[0].1, w[1].1) {
        (Some(a), Some(b)) if sign_change(a - target, b - target) => Some((w[0].0, a - target, w[1].0)),
        _ => None,
    });
    if let Some((a, ra, b)) = first_change {
        bisect(g, target, a, ra, b, &mut best);
        if best.err == 0.0 {
            return best.get();
        }
    }
    if let Some(k) = best_idx {
        let a = if k > 0 { scan[k - 1].0 } else { lo };
        let b = if k + 1 < scan.len() { scan[k + 1].0 } else { hi };
        golden(g, target, a, b, &mut best);
    }
    best.get()
}

/// Golden-section minimization of `|g - target|` on the open `(a, b)`.
fn golden<G: RealFn + ?Sized>(g: &G, target: f64, mut a: f64, mut b: f64, best: &mut Best) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let err = |t: f64| g.eval(t).map(|v| (v, (v - target).abs())).ok();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (err(c), err(d));
    for _ in 0..GOLDEN_STEPS {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) || best.err == 0.0 {
            break;
        }
        if let Some((v, _)) = fc {
            best.offer(c, v, target);
        }
        if let Some((v, _)) = fd {
            best.offer(d, v, target);
        }
        let ec = fc.map_or(f64::INFINITY, |p| p.1);
        let ed = fd.map_or(f64::INFINITY, |p| p.1);
        if ec <= ed {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = err(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = err(d);
        }
    }
}
