//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always shown.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use mvconvex::calculus::{one_sided_derivative, Side};
use mvconvex::feq::{
    convex_concave_check, mv_inequality_check, self_convexity_check, solve_mv_inequality, symmetric_convexity_check,
    uniqueness_probe,
};
use mvconvex::fnexpr::Constant;
use mvconvex::gconvex::{bounds_certificate, construct_from_quotient_bound, equivalence_suite, gconvex_check};
use mvconvex::mv::{mu_equation_check, mv_check, ode_residual, ode_residual_check, pointwise_mv_check};
use mvconvex::mv::{pointwise_mv_generate, PointwiseMvSpec};
use mvconvex::{Grid, Interval, RealFn, RealFunction, Tolerance};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn f(src: &str) -> RealFunction {
    RealFunction::on_reals(src).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Grid {
    Grid::uniform(Interval::open(lo, hi).unwrap(), n, (-10.0, 10.0), 1e-9, 1e-9).unwrap()
}

fn require(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn sup_error(got: &dyn RealFn, want: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    (0..=2000)
        .map(|i| lo + (hi - lo) * i as f64 / 2000.0)
        .map(|x| (got.eval(x).unwrap() - want(x)).abs())
        .fold(0.0, f64::max)
}

fn smooth_round_trip() -> Verdict {
    let tol = Tolerance::uniform(1e-8);
    let g = grid(-2.0, 2.0, 201);
    let (sq, lin) = (f("x^2"), f("2*x"));
    let mv = mv_check(&sq, &lin, &g, &tol).unwrap();
    require(mv.passed(), "mv_check failed")?;
    require(
        gconvex_check(&sq, &lin, &g, &tol).unwrap().passed,
        "gconvex_check failed",
    )?;
    require(
        equivalence_suite(&sq, &lin, &g, &[], &tol).unwrap().passed,
        "equivalence_suite failed",
    )?;
    require(
        bounds_certificate(&sq, &lin, &g, &tol).unwrap().passed,
        "bounds_certificate failed",
    )?;
    let worst = mv.samples.iter().map(|s| (s.lambda - 0.5).abs()).fold(0.0, f64::max);
    require(worst <= 1e-8, format!("lambda deviates from 0.5 by {worst:e}"))?;
    Ok(format!("{} pairs, max |lambda - 0.5| = {worst:.1e}", mv.samples.len()))
}

fn abs_alpha_family() -> Verdict {
    let tol = Tolerance::default();
    let g = grid(-2.0, 2.0, 201);
    let abs = f("abs(x)");
    let with = |alpha: f64| f(&format!("sgn(x) + ({alpha}) * (1 - abs(sgn(x)))"));
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        require(
            gconvex_check(&abs, &with(alpha), &g, &tol).unwrap().passed,
            format!("gconvex alpha {alpha}"),
        )?;
        require(
            bounds_certificate(&abs, &with(alpha), &g, &tol).unwrap().passed,
            format!("bounds alpha {alpha}"),
        )?;
    }
    let r = gconvex_check(&abs, &with(1.5), &g, &tol).unwrap();
    require(!r.passed, "alpha 1.5 passed")?;
    require(r.witnesses.iter().all(|w| w.y == 0.0), "alpha 1.5 failed away from 0")?;
    let b = bounds_certificate(&abs, &with(1.5), &g, &tol).unwrap();
    require(
        !b.passed && b.failing_points().all(|p| p[0] == 0.0),
        "certificate for 1.5 not failing at 0",
    )?;
    Ok(format!("alpha 1.5 fails at x = 0 with {} witnesses", r.witnesses.len()))
}

fn converse_separation() -> Verdict {
    let tol = Tolerance::default();
    let g = grid(-2.0, 2.0, 201);
    let (abs, sgn) = (f("abs(x)"), f("sgn(x)"));
    require(
        gconvex_check(&abs, &sgn, &g, &tol).unwrap().passed,
        "gconvex_check failed",
    )?;
    let mv = mv_check(&abs, &sgn, &g, &tol).unwrap();
    require(!mv.passed(), "mv_check passed")?;
    let alpha = sgn.eval(0.0).unwrap();
    let w = mv
        .report
        .witnesses
        .iter()
        .find(|w| w.points[0] < 0.0 && w.points[1] > 0.0 && ![-1.0, alpha, 1.0].contains(&w.lhs))
        .ok_or("no straddling witness with a quotient outside {-1, alpha, 1}")?;
    Ok(format!("witness ({}, {}) with DQ {}", w.points[0], w.points[1], w.lhs))
}

fn reconstruction() -> Verdict {
    let real = Interval::real_line();
    let abs = construct_from_quotient_bound(f("sgn(x)"), 0.0, 0.0, real, (-2.0, 2.0)).unwrap();
    let e1 = sup_error(&abs, f64::abs, -2.0, 2.0);
    let exp = construct_from_quotient_bound(f("exp(x)"), 0.0, 1.0, real, (-1.0, 1.0)).unwrap();
    let e2 = sup_error(&exp, f64::exp, -1.0, 1.0);
    require(e1 <= 1e-6 && e2 <= 1e-6, format!("sup errors {e1:e}, {e2:e}"))?;
    Ok(format!("sup errors {e1:.1e} (|x|), {e2:.1e} (exp)"))
}

fn pointwise() -> Verdict {
    let tol = Tolerance::default();
    let g = grid(-2.0, 2.0, 201);
    let gen = pointwise_mv_generate(f("x^2"), PointwiseMvSpec::new(0.0, 0.5).unwrap()).unwrap();
    let worst = g
        .points()
        .iter()
        .filter(|&&t| t != 0.0)
        .map(|&t| (gen.eval(t).unwrap() - 2.0 * t).abs())
        .fold(0.0, f64::max);
    require(worst <= 1e-12, format!("generator deviates from 2t by {worst:e}"))?;
    require(
        pointwise_mv_check(&f("x^2"), 0.0, &gen, &g, &tol).unwrap().passed(),
        "pointwise check failed",
    )?;
    for k in 1..=9 {
        let mu = Constant {
            value: k as f64 / 10.0,
            domain: Interval::real_line(),
        };
        let r = mu_equation_check(&mu, 0.0, &g, &tol).unwrap();
        require(
            r.passed && r.min_margin == Some(tol.slack(mu.value)),
            format!("mu {} not exact", mu.value),
        )?;
    }
    Ok(format!("max |g(t) - 2t| = {worst:.1e}"))
}

fn ode_residuals() -> Verdict {
    let tol = Tolerance::default();
    let g = grid(-2.0, 2.0, 41);
    let mut worst: f64 = 0.0;
    for k in [-3.0, 0.0, 2.5] {
        let lin = f(&format!("({k}) * x"));
        for mu in [0.25, 0.5, 0.75] {
            require(
                ode_residual_check(&lin, mu, &g, &tol).unwrap().passed,
                format!("k {k}, mu {mu}"),
            )?;
            for &t in g.points() {
                let (r, _) = ode_residual(&lin, mu, t, &tol).unwrap().ok_or("kink on a line")?;
                worst = worst.max(r.abs());
            }
        }
    }
    require(worst <= 1e-8, format!("linear residual {worst:e}"))?;
    let (r, _) = ode_residual(&f("x^2"), 0.5, 1.0, &tol)
        .unwrap()
        .ok_or("x^2 has no derivative at 1")?;
    require(
        r.abs() > 0.1,
        format!("linear residuals <= {worst:.1e}, but x^2 at mu = 0.5, t = 1 has residual {r:e}, not above 0.1"),
    )?;
    Ok(format!("linear residuals <= {worst:.1e}; x^2 residual {r}"))
}

fn inequality_solver() -> Verdict {
    let pos = Interval::open(0.0, f64::INFINITY).unwrap();
    let dom = Interval::open(0.1, 5.0).unwrap();
    let log = RealFunction::parse("log(x)", pos).unwrap();
    let s = solve_mv_inequality(log.clone(), dom, 0.5, 0.5f64.exp(), (0.1, 5.0)).unwrap();
    let err = (0..=2000)
        .map(|i| 0.1 + 4.9 * (i as f64 + 0.5) / 2001.0)
        .map(|x| (s.f.eval(x).unwrap() - x.exp()).abs())
        .fold(0.0, f64::max);
    require(err <= 1e-6, format!("sup error {err:e}"))?;
    let tol = Tolerance::default();
    let g = Grid::uniform(dom, 101, (-10.0, 10.0), 1e-9, 1e-9).unwrap();
    require(
        mv_inequality_check(&s.f, &log, &g, &tol).unwrap().passed,
        "mv_inequality_check failed",
    )?;
    require(
        uniqueness_probe(&s.f, &log, &g, &tol).unwrap().passed,
        "uniqueness_probe failed",
    )?;
    Ok(format!("sup error {err:.1e}"))
}

fn one_sided() -> Verdict {
    let abs = f("abs(x)");
    let r = one_sided_derivative(&abs, 0.0, Side::Right).unwrap().value;
    let l = one_sided_derivative(&abs, 0.0, Side::Left).unwrap().value;
    require(
        (r - 1.0).abs() <= 1e-6 && (l + 1.0).abs() <= 1e-6,
        format!("|x| at 0: {l}, {r}"),
    )?;
    let e = 1f64.exp();
    for side in [Side::Left, Side::Right] {
        let d = one_sided_derivative(&f("exp(x)"), 1.0, side).unwrap().value;
        require((d - e).abs() <= 1e-6, format!("exp at 1 ({side:?}): {d}"))?;
    }
    Ok(format!("|x|: ({l}, {r})"))
}

fn self_convexity() -> Verdict {
    let tol = Tolerance::default();
    let g = Grid::uniform(Interval::closed(-1.0, 1.0).unwrap(), 201, (-10.0, 10.0), 1e-9, 1e-9).unwrap();
    let v = self_convexity_check(&f("2*exp(x)"), &g, &tol).unwrap();
    require(v.passed, "2 e^t failed")?;
    let lambda = v.fitted_params["lambda"];
    require((lambda - 2.0).abs() <= 1e-6, format!("lambda {lambda}"))?;
    let v = self_convexity_check(&f("x^2"), &g, &tol).unwrap();
    require(!v.passed, "x^2 passed")?;
    let w = v.witnesses.first().ok_or("x^2 failed without a witness")?;
    Ok(format!(
        "lambda = {lambda}; x^2 witness ({}, {})",
        w.points[0], w.points[1]
    ))
}

fn systems() -> Verdict {
    let tol = Tolerance::default();
    let pos = Interval::open(0.0, f64::INFINITY).unwrap();
    let g = Grid::uniform(pos, 201, (0.01, 5.0), 1e-9, 1e-9).unwrap();
    let v = symmetric_convexity_check(&f("2*exp(x) + exp(-x)"), &f("2*exp(x) - exp(-x)"), &g, &tol).unwrap();
    require(v.passed, "symmetric system failed")?;
    let theta = v.reports.last().ok_or("no theta constraint report")?;
    require(
        theta.check == "theta_constraints" && theta.passed,
        "theta constraint violated",
    )?;
    let g = grid(-2.0, 2.0, 201);
    let v = convex_concave_check(&f("3*x + 1"), &f("3"), &f("3"), &g, &tol).unwrap();
    require(v.passed, "affine system failed")?;
    let (a, b) = (v.fitted_params["a"], v.fitted_params["b"]);
    require(
        (a - 3.0).abs() <= 1e-8 && (b - 1.0).abs() <= 1e-8,
        format!("fitted ({a}, {b})"),
    )?;
    let v = convex_concave_check(&f("x^2"), &f("2*x"), &f("2*x"), &g, &tol).unwrap();
    require(!v.passed, "x^2 passed")?;
    require(
        v.reports.iter().any(|r| r.check == "concave_side" && !r.passed)
            && v.reports.iter().all(|r| r.check == "concave_side" || r.passed),
        "x^2 did not fail on the concave side alone",
    )?;
    Ok(format!("fitted (a, b) = ({a}, {b})"))
}

fn determinism() -> Verdict {
    let runs: &[&[&str]] = &[
        &["check-gconvex", "--f", "abs(x)", "--g", "sgn(x)", "--interval", "-2:2"],
        &["check-mv", "--f", "abs(x)", "--g", "sgn(x)", "--interval", "-2:2"],
        &["solve-mv", "--g", "exp(x)", "--fc", "1", "--window", "-2:2"],
        &["solve-feq", "--system", "symmetric", "--f", "exp(x)", "--g", "exp(x)"],
        &["emit-table", "--g", "sgn(x)", "--interval", "-2:2", "--grid", "11"],
    ];
    for args in runs {
        let once = || {
            Command::new(env!("CARGO_BIN_EXE_mvconvex"))
                .args(*args)
                .arg("--json")
                .output()
                .unwrap()
        };
        let (a, b) = (once(), once());
        require(!a.stdout.is_empty(), format!("no output from {args:?}"))?;
        require(
            a.stdout == b.stdout && a.status == b.status,
            format!("{args:?} differs between runs"),
        )?;
    }
    Ok(format!("{} invocations byte-identical", runs.len()))
}

/// Criteria that cannot hold as stated, with the reason.
const EXPECTED_FAILURES: &[(&str, &str)] = &[(
    "6",
    "t f'(t) - mu f(t/mu) + mu f(0) vanishes identically for f = x^2 at mu = 0.5; -2 at t = 1 needs mu = 0.25",
)];

fn main() {
    let criteria: [Criterion; 11] = [
        ("1", smooth_round_trip),
        ("2", abs_alpha_family),
        ("3", converse_separation),
        ("4", reconstruction),
        ("5", pointwise),
        ("6", ode_residuals),
        ("7", inequality_solver),
        ("8", one_sided),
        ("9", self_convexity),
        ("10", systems),
        ("11", determinism),
    ];
    let mut unexpected = 0;
    for (id, run) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let known = EXPECTED_FAILURES.iter().find(|(k, _)| *k == id);
        match (&verdict, known) {
            (Ok(detail), None) => println!("criterion {id}: PASS ({detail})"),
            (Err(detail), Some((_, why))) => println!("criterion {id}: FAIL ({detail}) [expected: {why}]"),
            (Err(detail), None) => {
                unexpected += 1;
                println!("criterion {id}: FAIL ({detail})");
            }
            (Ok(detail), Some(_)) => {
                unexpected += 1;
                println!("criterion {id}: PASS ({detail}) [expected to fail; revisit the analysis]");
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria did not match their expected outcome");
        std::process::exit(1);
    }
}
