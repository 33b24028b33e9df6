use std::process::{Command, Output};

use serde_json::Value;

fn mvconvex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvconvex"))
        .args(args)
        .output()
        .unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = mvconvex(&all);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

const RUNS: &[&[&str]] = &[
    &["check-mv", "--f", "x^2", "--g", "2*x", "--interval", "-2:2"],
    &["check-mv", "--f", "abs(x)", "--g", "sgn(x)", "--interval", "-2:2"],
    &["check-pointwise-mv", "--f", "x^2", "--mu", "0.5", "--grid", "51"],
    &[
        "check-gconvex",
        "--f",
        "abs(x)",
        "--g",
        "sgn(x)",
        "--interval",
        "-2:2",
        "--lambda",
        "0.5",
    ],
    &[
        "check-bounds",
        "--f",
        "abs(x)",
        "--g",
        "sgn(x) + 2 * (1 - abs(sgn(x)))",
        "--grid",
        "21",
    ],
    &["check-mv-ineq", "--f", "exp(x)", "--h", "log(x)", "--interval", "-2:2"],
    &["construct", "--g", "exp(x)", "--fc", "1", "--window", "-1:1"],
    &["solve-mv", "--g", "2*x", "--window", "-2:2"],
    &[
        "solve-feq",
        "--system",
        "self-convex",
        "--f",
        "x^2",
        "--interval",
        "-1:1",
    ],
    &[
        "solve-feq",
        "--system",
        "linear",
        "--k",
        "1",
        "--fc",
        "-1",
        "--interval",
        "-1:1",
    ],
    &[
        "solve-feq",
        "--system",
        "convex-concave",
        "--f",
        "x^2",
        "--g",
        "2*x",
        "--h",
        "2*x",
        "--grid",
        "21",
    ],
];

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in RUNS {
        let mut all = args.to_vec();
        all.push("--json");
        let (a, b) = (mvconvex(&all), mvconvex(&all));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn exit_code_matches_verdict() {
    for args in RUNS {
        let (code, doc) = report(args);
        let passed = doc["passed"].as_bool().unwrap();
        assert_eq!(code, if passed { 0 } else { 1 }, "{args:?}");
        assert_eq!(doc["verdict"], if passed { "pass" } else { "fail" });
        assert_eq!(doc["schema_version"], "mvconvex-report/1");
        if !passed {
            assert!(!doc["witnesses"].as_array().unwrap().is_empty(), "{args:?}");
        }
    }
}

#[test]
fn failing_mean_value_check_reports_a_straddling_pair() {
    let (code, doc) = report(&["check-mv", "--f", "abs(x)", "--g", "sgn(x)", "--interval", "-2:2"]);
    assert_eq!(code, 1);
    let points = doc["witnesses"][0]["witness"]["points"].as_array().unwrap();
    assert!(points[0].as_f64().unwrap() < 0.0 && points[1].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_and_numeric_errors() {
    assert_eq!(
        mvconvex(&["emit-table", "--f", "x", "--grid", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mvconvex(&["check-mv", "--f", "abs(x", "--g", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(mvconvex(&["check-mv", "--g", "1"]).status.code(), Some(2));
    assert_eq!(
        mvconvex(&["check-mv", "--f", "x", "--g", "1", "--interval", "3:1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mvconvex(&["nonsense"]).status.code(), Some(2));
    assert_eq!(mvconvex(&["solve-mv-ineq", "--h", "x^2"]).status.code(), Some(2));
    let blow_up = mvconvex(&["solve-feq", "--system", "linear", "--k", "1000", "--fc", "1"]);
    assert_eq!(blow_up.status.code(), Some(3));
    assert_eq!(mvconvex(&["--help"]).status.code(), Some(0));
}

#[test]
fn tables_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("abs.csv");
    let out = mvconvex(&[
        "emit-table",
        "--g",
        "sgn(x)",
        "--interval",
        "-2:2",
        "--grid",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,f"));
    for line in lines {
        let (x, y) = line.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!((y - x.abs()).abs() < 1e-9);
    }
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn config_files_supply_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "f = \"abs(x)\"\ng = \"sgn(x)\"\ninterval = \"-2:2\"\ngrid = 31\n",
    )
    .unwrap();
    let (code, doc) = report(&["check-gconvex", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc["command"]["grid"]["size"], 31);
    let (code, _) = report(&["check-mv", "--config", path.to_str().unwrap(), "--g", "1"]);
    assert_eq!(code, 1);
}
