use super::{dq_noise, Grid, Tolerance};
use crate::error::Result;
use crate::fnexpr::{eval_grid, RealFn};
use crate::report::{CheckReport, ReportBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Passes iff `g(x_i) <= g(x_j) + slack` for all `i < j`.
///
/// Strictness is reported as a note, never asserted.
pub fn check_monotone<G: RealFn + ?Sized>(g: &G, grid: &Grid, tol: &Tolerance) -> Result<CheckReport> {
    let values = eval_grid(g, grid)?;
    Ok(check_monotone_values(
        grid.points(),
        &values,
        Direction::Increasing,
        tol,
    ))
}

/// Monotonicity of sampled values. Each `j` is compared with the running
/// extreme of the prefix, which is the worst partner among all `i < j`.
pub fn check_monotone_values(points: &[f64], values: &[f64], dir: Direction, tol: &Tolerance) -> CheckReport {
    let name = match dir {
        Direction::Increasing => "monotone_increasing",
        Direction::Decreasing => "monotone_decreasing",
    };
    let mut b = ReportBuilder::new(name);
    let s = match dir {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    let mut strict = true;
    let mut best = 0usize;
    for j in 1..values.len() {
        let (vi, vj) = (s * values[best], s * values[j]);
        b.le(&[points[best], points[j]], vi, vj, tol.slack(vi.abs().max(vj.abs())));
        if s * (values[j] - values[j - 1]) <= tol.strict_margin {
            strict = false;
        }
        if vj > vi {
            best = j;
        }
    }
    if b.passed() {
        b.note(if strict {
            "strictly monotone on the grid (adjacent gaps exceed strict_margin)"
        } else {
            "monotone on the grid, not robustly strict"
        });
    }
    b.finish()
}

/// Chord-slope test: `DQ(x, y) <= DQ(y, z) + slack` for every grid triple
/// `x < y < z`.
pub fn check_convex<F: RealFn + ?Sized>(f: &F, grid: &Grid, tol: &Tolerance) -> Result<CheckReport> {
    let xs = grid.points();
    let fs = eval_grid(f, grid)?;
    let n = xs.len();
    let mut dq = vec![0.0; n * n];
    let mut noise = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[j] - xs[i];
            dq[i * n + j] = (fs[j] - fs[i]) / dx;
            noise[i * n + j] = dq_noise(fs[i], fs[j], dx);
        }
    }
    let mut b = ReportBuilder::new("convex_chord_slopes");
    for i in 0..n {
        for j in i + 1..n {
            let (left, ln) = (dq[i * n + j], noise[i * n + j]);
            for k in j + 1..n {
                let (right, rn) = (dq[j * n + k], noise[j * n + k]);
                let slack = tol.slack(left.abs().max(right.abs())) + ln + rn;
                b.le(&[xs[i], xs[j], xs[k]], left, right, slack);
            }
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnexpr::{Interval, RealFunction};

    fn f(src: &str) -> RealFunction {
        RealFunction::on_reals(src).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::uniform(Interval::closed(lo, hi).unwrap(), n, (-10.0, 10.0), 1e-9, 1e-9).unwrap()
    }

    #[test]
    fn monotone_examples() {
        let tol = Tolerance::default();
        assert!(
            check_monotone(&f("exp(x)"), &grid(-1.0, 1.0, 101), &tol)
                .unwrap()
                .passed
        );
        let r = check_monotone(&f("-x"), &grid(-1.0, 1.0, 101), &tol).unwrap();
        assert!(!r.passed);
        let w = r.worst.unwrap();
        assert!(w.points[0] < w.points[1]);
        assert!(
            check_monotone(&f("sgn(x)"), &grid(-2.0, 2.0, 101), &tol)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn worst_monotone_pair_spans_the_largest_drop() {
        let tol = Tolerance::default();
        let r = check_monotone(&f("-x"), &grid(-1.0, 1.0, 11), &tol).unwrap();
        let w = r.worst.unwrap();
        let g = grid(-1.0, 1.0, 11);
        assert_eq!(w.points, vec![g.first(), g.last()]);
    }

    #[test]
    fn convex_examples() {
        let tol = Tolerance::default();
        let g = grid(-2.0, 2.0, 41);
        assert!(check_convex(&f("x^2"), &g, &tol).unwrap().passed);
        assert!(check_convex(&f("abs(x)"), &g, &tol).unwrap().passed);
        let r = check_convex(&f("-x^2"), &g, &tol).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst.unwrap().points.len(), 3);
    }
}
