use mvconvex::calculus::check_monotone;
use mvconvex::fnexpr::{eval_grid, Constant};
use mvconvex::gconvex::{
    bounds_certificate, construct_from_quotient_bound, dqb_family, equivalence_suite, gconvex_check, LambdaBlend,
};
use mvconvex::mv::mv_check;
use mvconvex::{Grid, Interval, RealFn, RealFunction, Tolerance};
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::uniform(Interval::open(-2.0, 2.0).unwrap(), n, (-10.0, 10.0), 1e-9, 1e-9).unwrap()
}

fn f(src: &str) -> RealFunction {
    RealFunction::on_reals(src).unwrap()
}

/// A convex `f = a x^2 + b |x| + c e^x` and a slope function: its
/// derivative with value `alpha b` at the kink, shifted by `shift`.
#[derive(Debug, Clone)]
struct Case {
    f: String,
    g: String,
}

fn case() -> impl Strategy<Value = Case> {
    (
        0.0f64..2.0,
        0.0f64..2.0,
        0.0f64..1.0,
        -1.0f64..=1.0,
        prop_oneof![Just(0.0), 0.5f64..2.0, -2.0f64..-0.5],
    )
        .prop_map(|(a, b, c, alpha, shift)| Case {
            f: format!("{a} * x^2 + {b} * abs(x) + {c} * exp(x)"),
            g: format!("2 * {a} * x + {b} * (sgn(x) + ({alpha}) * (1 - abs(sgn(x)))) + {c} * exp(x) + ({shift})"),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equivalent_conditions_agree(c in case()) {
        let r = equivalence_suite(&f(&c.f), &f(&c.g), &grid(15), &[], &Tolerance::default()).unwrap();
        prop_assert!(!r.consistency_alarm, "{c:?}: {:?}", r.per_condition);
    }

    #[test]
    fn definition_agrees_with_derivative_certificate(c in case()) {
        let tol = Tolerance::default();
        let g = grid(21);
        let direct = gconvex_check(&f(&c.f), &f(&c.g), &g, &tol).unwrap().passed;
        let certified = bounds_certificate(&f(&c.f), &f(&c.g), &g, &tol).unwrap().passed;
        prop_assert_eq!(direct, certified, "{:?}", c);
    }

    #[test]
    fn increasing_mean_value_functions_are_slope_bounds(c in case()) {
        let tol = Tolerance::default();
        let g = grid(15);
        let (func, slope) = (f(&c.f), f(&c.g));
        let mv = mv_check(&func, &slope, &g, &tol).unwrap().passed();
        let mono = check_monotone(&slope, &g, &tol).unwrap().passed;
        if mv && mono {
            prop_assert!(gconvex_check(&func, &slope, &g, &tol).unwrap().passed, "{:?}", c);
        }
    }

    #[test]
    fn constructed_functions_round_trip(
        a in 0.0f64..2.0,
        b in 0.0f64..2.0,
        shift in -2.0f64..2.0,
        c in -1.5f64..1.5,
        v in -5.0f64..5.0,
    ) {
        let tol = Tolerance::default();
        let g = f(&format!("{a} * x^3 + {b} * sgn(x - 0.3) + ({shift})"));
        let built = construct_from_quotient_bound(g.clone(), c, v, Interval::real_line(), (-2.0, 2.0)).unwrap();
        prop_assert_eq!(built.eval(c).unwrap(), v);
        prop_assert!(gconvex_check(&built, &g, &grid(21), &tol).unwrap().passed);
    }

    #[test]
    fn blended_one_sided_derivatives_are_certified(
        a in 0.0f64..2.0,
        b in 0.0f64..2.0,
        kink in -1.0f64..1.0,
        weight in prop_oneof![(0.0f64..=1.0).prop_map(|l| l.to_string()), Just("(1 + sgn(x)) / 2".to_string())],
    ) {
        let tol = Tolerance::default();
        let g = grid(21);
        let func = f(&format!("{a} * x^2 + {b} * abs(x - ({kink})) + exp(x)"));
        let blend = dqb_family(func.clone(), LambdaBlend::new(f(&weight)), &g, &tol).unwrap();
        let r = bounds_certificate(&func, &blend, &g, &tol).unwrap();
        prop_assert!(r.passed, "{:?}", r.worst);
    }

    #[test]
    fn only_constants_are_zero_convex(c in -5.0f64..5.0, eps in prop_oneof![Just(0.0), 1e-3f64..1.0]) {
        let tol = Tolerance::default();
        let g = grid(21);
        let func = f(&format!("({c}) + ({eps}) * x^3"));
        let zero = Constant { value: 0.0, domain: Interval::real_line() };
        let values = eval_grid(&func, &g).unwrap();
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        let passed = gconvex_check(&func, &zero, &g, &tol).unwrap().passed;
        prop_assert_eq!(passed, spread <= tol.slack(c));
    }
}

#[test]
fn absolute_value_separates_the_two_notions() {
    let tol = Tolerance::default();
    let g = grid(41);
    let (abs, sgn) = (f("abs(x)"), f("sgn(x)"));
    assert!(gconvex_check(&abs, &sgn, &g, &tol).unwrap().passed);
    let mv = mv_check(&abs, &sgn, &g, &tol).unwrap();
    assert!(!mv.passed());
    assert!(mv.report.failing_points().all(|p| p[0] < 0.0 && p[1] > 0.0));
}
