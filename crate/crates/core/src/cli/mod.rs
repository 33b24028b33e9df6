//! Command-line front end: argument and config parsing, dispatch to the
//! checkers and solvers, deterministic JSON reports and CSV tables.

mod format;

pub use format::{format_float, to_json};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calculus::{Grid, GridSpec, Tolerance};
use crate::error::{Error, EvalError, Result};
use crate::feq::{self, SystemVerdict};
use crate::fnexpr::{eval_grid, Interval, RealFn, RealFunction};
use crate::gconvex::{self, bounds_certificate, equivalence_suite, gconvex_check};
use crate::mv::{self, mu_equation_check, mv_check, pointwise_mv_check, pointwise_mv_generate, PointwiseMvSpec};
use crate::report::CheckReport;

pub const SCHEMA_VERSION: &str = "mvconvex-report/1";

const DEFAULT_WINDOW: (f64, f64) = (-10.0, 10.0);
const MAX_DETAIL_WITNESSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    /// Check that g is a mean-value function of f on grid pairs.
    CheckMv,
    /// Check the mean-value relation for pairs anchored at --x0.
    CheckPointwiseMv,
    /// Check f(x) >= f(y) + g(y)(x - y) and its equivalent forms.
    CheckGconvex,
    /// Certify g through the one-sided derivatives of f.
    CheckBounds,
    /// Check min(x, y) < h(DQ(x, y)) < max(x, y).
    CheckMvIneq,
    /// Integrate an increasing g from (--x0, --fc).
    Construct,
    /// Solve the mean-value functional equation for g.
    SolveMv,
    /// Solve the mean-value functional inequality for h.
    SolveMvIneq,
    /// Check one of the comparative-convexity systems.
    SolveFeq,
    /// Write x,f(x) rows for --f, or for the function constructed from --g.
    EmitTable,
}

impl CommandName {
    fn as_str(self) -> &'static str {
        match self {
            CommandName::CheckMv => "check-mv",
            CommandName::CheckPointwiseMv => "check-pointwise-mv",
            CommandName::CheckGconvex => "check-gconvex",
            CommandName::CheckBounds => "check-bounds",
            CommandName::CheckMvIneq => "check-mv-ineq",
            CommandName::Construct => "construct",
            CommandName::SolveMv => "solve-mv",
            CommandName::SolveMvIneq => "solve-mv-ineq",
            CommandName::SolveFeq => "solve-feq",
            CommandName::EmitTable => "emit-table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemName {
    SelfConvex,
    Linear,
    Symmetric,
    ConvexConcave,
}

#[derive(Debug, Parser)]
#[command(name = "mvconvex", version, about = "Mean-value functions and comparative convexity")]
struct Cli {
    #[command(subcommand)]
    command: CommandName,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct Flags {
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    mu: Option<String>,
    /// LO:HI with optional :oo, :oc, :co or :cc (default open).
    #[arg(long, global = true, value_name = "LO:HI[:FLAGS]", allow_hyphen_values = true)]
    interval: Option<String>,
    /// Sampling window for unbounded intervals.
    #[arg(long, global = true, value_name = "LO:HI", allow_hyphen_values = true)]
    window: Option<String>,
    /// Number of uniform grid points (at least 3).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Absolute and relative tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Blend weight in [0, 1]; repeatable.
    #[arg(long = "lambda", global = true, value_name = "L")]
    #[serde(default)]
    lambda: Vec<f64>,
    /// Anchor point: x0, the integration constant c, or t0.
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Value of the constructed function at the anchor.
    #[arg(long, global = true, value_name = "Y", allow_hyphen_values = true)]
    fc: Option<f64>,
    #[arg(long, global = true, value_name = "K", allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, global = true, value_enum)]
    system: Option<SystemName>,
    /// Write the report (or table) to a file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the JSON report instead of a summary.
    #[arg(long, global = true)]
    #[serde(default)]
    json: bool,
    /// Flat TOML file with the same keys as the flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl Flags {
    fn merge_over(self, file: Flags) -> Flags {
        Flags {
            f: self.f.or(file.f),
            g: self.g.or(file.g),
            h: self.h.or(file.h),
            phi: self.phi.or(file.phi),
            mu: self.mu.or(file.mu),
            interval: self.interval.or(file.interval),
            window: self.window.or(file.window),
            grid: self.grid.or(file.grid),
            tol: self.tol.or(file.tol),
            lambda: if self.lambda.is_empty() {
                file.lambda
            } else {
                self.lambda
            },
            x0: self.x0.or(file.x0),
            fc: self.fc.or(file.fc),
            k: self.k.or(file.k),
            system: self.system.or(file.system),
            out: self.out.or(file.out),
            json: self.json || file.json,
            config: self.config,
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub functions: BTreeMap<String, String>,
    #[serde(serialize_with = "format::interval")]
    pub interval: Interval,
    pub window: (f64, f64),
    pub grid: GridSpec,
    pub tolerance: Tolerance,
    pub lambdas: Vec<f64>,
    pub x0: f64,
    pub fc: f64,
    pub k: Option<f64>,
    pub system: Option<SystemName>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub json: bool,
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64, Option<String>)> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("{what}: `{s}` is not a number")))
    };
    match parts.as_slice() {
        [lo, hi] => Ok((num(lo)?, num(hi)?, None)),
        [lo, hi, flags] => Ok((num(lo)?, num(hi)?, Some(flags.to_string()))),
        _ => Err(Error::InvalidInput(format!("{what}: expected LO:HI, got `{text}`"))),
    }
}

/// Parses `LO:HI[:oo|oc|co|cc]`; infinite ends are always open.
pub fn parse_interval(text: &str) -> Result<Interval> {
    let (lo, hi, flags) = parse_pair(text, "interval")?;
    let (lc, hc) = match flags.as_deref() {
        None | Some("oo") => (false, false),
        Some("oc") => (false, true),
        Some("co") => (true, false),
        Some("cc") => (true, true),
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "interval flags must be oo, oc, co or cc, got `{other}`"
            )))
        }
    };
    Interval::new(lo, hi, lc && lo.is_finite(), hc && hi.is_finite())
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    match parse_pair(text, "window")? {
        (lo, hi, None) if lo < hi && lo.is_finite() && hi.is_finite() => Ok((lo, hi)),
        _ => Err(Error::InvalidInput(format!(
            "window must be finite LO:HI with LO < HI, got `{text}`"
        ))),
    }
}

impl RunConfig {
    fn resolve(command: CommandName, flags: Flags) -> Result<Self> {
        let interval = flags
            .interval
            .as_deref()
            .map(parse_interval)
            .transpose()?
            .unwrap_or(Interval::real_line());
        let window = flags
            .window
            .as_deref()
            .map(parse_window)
            .transpose()?
            .unwrap_or(DEFAULT_WINDOW);
        let tolerance = match flags.tol {
            Some(t) => Tolerance::new(t, t, Tolerance::default().strict_margin)?,
            None => Tolerance::default(),
        };
        let grid = GridSpec {
            size: flags.grid.unwrap_or(GridSpec::default().size),
            window,
            ..GridSpec::default()
        };
        if grid.size < 3 {
            return Err(Error::InvalidInput(format!(
                "--grid must be at least 3, got {}",
                grid.size
            )));
        }
        if let Some(l) = flags.lambda.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::InvalidInput(format!("--lambda {l} is outside [0, 1]")));
        }
        let functions = [
            ("f", flags.f),
            ("g", flags.g),
            ("h", flags.h),
            ("phi", flags.phi),
            ("mu", flags.mu),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect();
        Ok(Self {
            command,
            functions,
            interval,
            window,
            grid,
            tolerance,
            lambdas: flags.lambda,
            x0: flags.x0.unwrap_or(0.0),
            fc: flags.fc.unwrap_or(0.0),
            k: flags.k,
            system: flags.system,
            out: flags.out,
            json: flags.json,
        })
    }

    /// Parses command-line arguments (program name first), reading
    /// `--config` if given.
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let Cli { command, flags } = Cli::try_parse_from(args)?;
        let resolve = || -> Result<Self> {
            let flags = match flags.config.clone() {
                Some(path) => flags.merge_over(read_config(&path)?),
                None => flags,
            };
            Self::resolve(command, flags)
        };
        resolve().map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
    }

    fn expr(&self, name: &str, domain: Interval) -> Result<RealFunction> {
        let src = self
            .functions
            .get(name)
            .ok_or_else(|| Error::InvalidInput(format!("{} needs --{name}", self.command.as_str())))?;
        RealFunction::parse(src, domain)
    }

    fn build_grid(&self) -> Result<Grid> {
        Grid::build(
            self.interval,
            &self.grid,
            self.tolerance.abs_tol,
            self.tolerance.rel_tol,
        )
    }
}

fn read_config(path: &Path) -> Result<Flags> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))
}

/// The report written for every successful run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: RunConfig,
    pub passed: bool,
    pub verdict: String,
    pub reports: Vec<CheckReport>,
    pub witnesses: Value,
    pub fitted_params: BTreeMap<String, f64>,
    pub metadata: Value,
    pub timing: Value,
    pub notes: Vec<String>,
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: ReportDocument,
    /// CSV text for `emit-table`.
    pub table: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.document.passed {
            0
        } else {
            1
        }
    }
}

/// Exit code for a failed run: 3 for numeric breakdowns, 2 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_)
        | Error::Eval(EvalError::Numeric(_))
        | Error::EvalAt {
            source: EvalError::Numeric(_),
            ..
        } => 3,
        _ => 2,
    }
}

struct Partial {
    reports: Vec<CheckReport>,
    witnesses: Value,
    params: BTreeMap<String, f64>,
    notes: Vec<String>,
    passed: Option<bool>,
    table: Option<String>,
}

impl Partial {
    fn new(reports: Vec<CheckReport>) -> Self {
        Self {
            reports,
            witnesses: Value::Array(Vec::new()),
            params: BTreeMap::new(),
            notes: Vec::new(),
            passed: None,
            table: None,
        }
    }

    fn from_system(v: SystemVerdict) -> Self {
        let mut p = Self::new(v.reports);
        p.witnesses = serde_json::to_value(&v.witnesses).unwrap_or(Value::Null);
        p.params = v.fitted_params;
        p.notes = v.notes;
        p.notes.insert(0, format!("system {}", v.system));
        p.passed = Some(v.passed);
        p
    }
}

fn report_witnesses(reports: &[CheckReport]) -> Value {
    let all: Vec<_> = reports
        .iter()
        .filter(|r| !r.passed)
        .flat_map(|r| {
            r.worst
                .iter()
                .chain(&r.witnesses)
                .map(move |w| json!({"check": r.check, "witness": w}))
        })
        .take(MAX_DETAIL_WITNESSES)
        .collect();
    Value::Array(all)
}

/// `x,f` rows with a header, LF line endings and 17 significant digits.
pub fn emit_table<F: RealFn + ?Sized>(f: &F, grid: &Grid) -> Result<String> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let mut out = String::from("x,f\n");
    for (x, y) in grid.points().iter().zip(eval_grid(f, grid)?) {
        out.push_str(&format!("{},{}\n", format_float(*x), format_float(y)));
    }
    Ok(out)
}

/// Domain of `src` inside the window, found by scanning: the longest
/// evaluable run, with its ends located by bisection and extended to
/// infinity where the run reaches the window edge.
fn natural_domain(src: &str, window: (f64, f64)) -> Result<Interval> {
    const SCAN: usize = 4097;
    let probe = RealFunction::parse(src, Interval::real_line())?;
    let ok = |x: f64| probe.eval(x).is_ok();
    let xs: Vec<f64> = (0..SCAN)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (SCAN - 1) as f64)
        .collect();
    let good: Vec<bool> = xs.iter().map(|&x| ok(x)).collect();
    let (mut best, mut start) = ((0, 0), None);
    for i in 0..=SCAN {
        match (good.get(i).copied().unwrap_or(false), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best.1 - best.0 {
                    best = (s, i);
                }
                start = None;
            }
            _ => {}
        }
    }
    let (a, b) = best;
    if b == a {
        return Err(Error::InvalidInput(format!("`{src}` is nowhere defined on the window")));
    }
    let edge = |mut bad: f64, mut good: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (bad + good);
            if mid == bad || mid == good {
                break;
            }
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        bad
    };
    let lo = if a == 0 {
        f64::NEG_INFINITY
    } else {
        edge(xs[a - 1], xs[a])
    };
    let hi = if b == SCAN {
        f64::INFINITY
    } else {
        edge(xs[b], xs[b - 1])
    };
    Interval::open(lo, hi)
}

fn mv_details(c: &mv::MvCheck) -> Value {
    let lambdas = c.samples.iter().map(|s| s.lambda);
    let (lo, hi) = lambdas.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(l), b.max(l)));
    json!({
        "certified_pairs": c.witnesses.len(),
        "lambda_range": if c.samples.is_empty() { Value::Null } else { json!([lo, hi]) },
    })
}

fn dispatch(cfg: &RunConfig) -> Result<Partial> {
    let grid = cfg.build_grid()?;
    let tol = &cfg.tolerance;
    let dom = cfg.interval;
    let reals = Interval::real_line();
    let p = match cfg.command {
        CommandName::CheckMv => {
            let c = mv_check(&cfg.expr("f", dom)?, &cfg.expr("g", dom)?, &grid, tol)?;
            let mut p = Partial::new(vec![c.report.clone()]);
            p.notes.push(mv_details(&c).to_string());
            p
        }
        CommandName::CheckPointwiseMv => {
            let f = cfg.expr("f", dom)?;
            if cfg.functions.contains_key("g") {
                let c = pointwise_mv_check(&f, cfg.x0, &cfg.expr("g", reals)?, &grid, tol)?;
                Partial::new(vec![c.report])
            } else {
                let mu = cfg.expr("mu", reals)?;
                let mu_report = mu_equation_check(&mu, cfg.x0, &grid, tol)?;
                let m = mu.eval(cfg.x0)?;
                if eval_grid(&mu, &grid)?.iter().any(|&v| v != m) {
                    let mut p = Partial::new(vec![mu_report]);
                    p.notes
                        .push("mu is not constant; only its functional equation is checked".into());
                    p
                } else {
                    let g = pointwise_mv_generate(f.clone(), PointwiseMvSpec::new(cfg.x0, m)?)?;
                    let c = pointwise_mv_check(&f, cfg.x0, &g, &grid, tol)?;
                    let mut p = Partial::new(vec![mu_report, c.report]);
                    p.params.insert("mu".into(), m);
                    if let Some(v) = g.center_value() {
                        p.params.insert("g_at_x0".into(), v);
                    }
                    p
                }
            }
        }
        CommandName::CheckGconvex => {
            let r = equivalence_suite(&cfg.expr("f", dom)?, &cfg.expr("g", dom)?, &grid, &cfg.lambdas, tol)?;
            let mut p = Partial::new(r.conditions.into_values().collect());
            p.passed = Some(r.passed);
            p.witnesses = serde_json::to_value(r.witnesses.iter().take(MAX_DETAIL_WITNESSES).collect::<Vec<_>>())
                .unwrap_or(Value::Null);
            p.notes = r.notes;
            if r.consistency_alarm {
                p.notes.push("consistency alarm raised".into());
            }
            p
        }
        CommandName::CheckBounds => {
            let r = bounds_certificate(&cfg.expr("f", dom)?, &cfg.expr("g", dom)?, &grid, tol)?;
            Partial::new(vec![r])
        }
        CommandName::CheckMvIneq => {
            let r = feq::mv_inequality_check(&cfg.expr("f", dom)?, &cfg.expr("h", reals)?, &grid, tol)?;
            Partial::new(vec![r])
        }
        CommandName::Construct => {
            let g = cfg.expr("g", dom)?;
            let f = gconvex::construct_from_quotient_bound(g.clone(), cfg.x0, cfg.fc, dom, cfg.window)?;
            let r = gconvex_check(&f, &g, &grid, tol)?;
            let mut p = Partial::new(r.conditions.into_values().collect());
            p.params.insert("integration_error_bound".into(), f.error_bound());
            p.params.insert("integration_error_estimate".into(), f.error_estimate());
            p
        }
        CommandName::SolveMv => {
            let g = cfg.expr("g", dom)?;
            let s = feq::solve_mv_equation(g.clone(), dom, cfg.x0, cfg.fc, cfg.window)?;
            let c = mv_check(&s.f, &g, &grid, tol)?;
            let strict = s.strictness(&grid, tol)?;
            let mut p = Partial::new(vec![c.report, strict]);
            p.params = s.params.clone();
            p
        }
        CommandName::SolveMvIneq => {
            let src = cfg
                .functions
                .get("h")
                .ok_or_else(|| Error::InvalidInput("solve-mv-ineq needs --h".into()))?;
            let h = RealFunction::parse(src, natural_domain(src, cfg.window)?)?;
            let s = feq::solve_mv_inequality(h.clone(), dom, cfg.x0, cfg.fc, cfg.window)?;
            let ineq = feq::mv_inequality_check(&s.f, &h, &grid, tol)?;
            let unique = feq::uniqueness_probe(&s.f, &h, &grid, tol)?;
            let mut p = Partial::new(vec![ineq, unique]);
            p.params = s.params.clone();
            p.notes.push(format!("h taken on {}", h.domain()));
            p
        }
        CommandName::SolveFeq => {
            let system = cfg
                .system
                .ok_or_else(|| Error::InvalidInput("solve-feq needs --system".into()))?;
            let v = match system {
                SystemName::SelfConvex => feq::self_convexity_check(&cfg.expr("f", dom)?, &grid, tol)?,
                SystemName::Linear => {
                    let k = cfg
                        .k
                        .ok_or_else(|| Error::InvalidInput("the linear system needs --k".into()))?;
                    let phi = match cfg.functions.get("phi") {
                        Some(_) => cfg.expr("phi", dom)?,
                        None => RealFunction::parse("0", dom)?,
                    };
                    feq::linear_comparative_solve(k, &phi, dom, cfg.x0, cfg.fc, &grid, tol)?.verdict
                }
                SystemName::Symmetric => {
                    feq::symmetric_convexity_check(&cfg.expr("f", dom)?, &cfg.expr("g", dom)?, &grid, tol)?
                }
                SystemName::ConvexConcave => feq::convex_concave_check(
                    &cfg.expr("f", dom)?,
                    &cfg.expr("g", dom)?,
                    &cfg.expr("h", dom)?,
                    &grid,
                    tol,
                )?,
            };
            Partial::from_system(v)
        }
        CommandName::EmitTable => {
            let table = if cfg.functions.contains_key("f") {
                emit_table(&cfg.expr("f", dom)?, &grid)?
            } else {
                let g = cfg.expr("g", dom)?;
                let f = gconvex::construct_from_quotient_bound(g, cfg.x0, cfg.fc, dom, cfg.window)?;
                emit_table(&f, &grid)?
            };
            let mut p = Partial::new(Vec::new());
            p.params.insert("rows".into(), grid.len() as f64);
            p.table = Some(table);
            p
        }
    };
    Ok(p)
}

/// Runs one resolved invocation.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let mut p = dispatch(cfg)?;
    let passed = p.passed.unwrap_or_else(|| p.reports.iter().all(|r| r.passed));
    if p.witnesses.as_array().is_some_and(|w| w.is_empty()) {
        p.witnesses = report_witnesses(&p.reports);
    }
    let grid = cfg.build_grid()?;
    let evaluations: usize = p.reports.iter().map(|r| r.evaluated).sum();
    let document = ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        command: cfg.clone(),
        passed,
        verdict: if passed { "pass" } else { "fail" }.into(),
        reports: p.reports,
        witnesses: p.witnesses,
        fitted_params: p.params,
        metadata: json!({
            "interval": cfg.interval.to_string(),
            "window": [cfg.window.0, cfg.window.1],
            "grid": {
                "uniform_points": cfg.grid.size,
                "low_discrepancy_points": cfg.grid.extra,
                "seed": cfg.grid.seed,
                "points": grid.len(),
                "first": grid.first(),
                "last": grid.last(),
            },
            "tolerance": cfg.tolerance,
        }),
        timing: json!({ "evaluations": evaluations }),
        notes: p.notes,
    };
    Ok(Outcome {
        document,
        table: p.table,
    })
}

fn summary(doc: &ReportDocument) -> String {
    let mut s = format!("{} {}\n", doc.verdict.to_uppercase(), doc.command.command.as_str());
    for r in &doc.reports {
        s.push_str(&format!(
            "  {}: {} ({} evaluated, {} violations)\n",
            r.check,
            if r.passed { "pass" } else { "fail" },
            r.evaluated,
            r.violations
        ));
        if let Some(w) = &r.worst {
            let pts: Vec<String> = w.points.iter().map(|p| format_float(*p)).collect();
            s.push_str(&format!(
                "    worst at [{}]: margin {}\n",
                pts.join(", "),
                format_float(w.margin)
            ));
        }
    }
    for (k, v) in &doc.fitted_params {
        s.push_str(&format!("  {k} = {}\n", format_float(*v)));
    }
    s
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Full process behaviour: parse, run, print, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let code = error_exit_code(&e);
            eprintln!("error: {e}");
            if cfg.json {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": cfg,
                    "error": e.to_string(),
                    "exit_code": code,
                });
                emit(&format!("{}\n", to_json(&doc)));
            }
            return code;
        }
    };
    let report = to_json(&outcome.document);
    let written = match (&outcome.table, &cfg.out) {
        (Some(t), Some(path)) => write_file(path, t),
        (Some(t), None) => {
            emit(t);
            Ok(())
        }
        (None, Some(path)) => write_file(path, &report),
        (None, None) => Ok(()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return 2;
    }
    if cfg.json {
        emit(&format!("{report}\n"));
    } else if outcome.table.is_none() {
        emit(&summary(&outcome.document));
    }
    outcome.exit_code()
}
