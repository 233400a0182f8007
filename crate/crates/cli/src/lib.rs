//! Job-file driven front end for `meanlab-core`.
//!
//! A job is a JSON document describing a generator pair (or Gini parameters,
//! or a quasi-arithmetic generator), a family, a measure and the points to
//! work on. [`run`] executes one command and returns an exit status, a
//! fixed-layout text table and a JSON report. The report echoes the job and
//! every effective setting, so it is enough to re-run the job.

use std::fmt::Write as _;

use meanlab_core::{
    classify_homogeneous, classify_homogeneous_qa, decide_equality, decide_equality_qa, derivative_check,
    eval_gini_closed, eval_quasi_arithmetic, DecisionReport, Error as CoreError, Expr, GeneratorPair, GiniParams,
    Interval, Mean, MeanFamily, Measure, ParameterSpace, Verdict,
};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const STATUS_OK: i32 = 0;
pub const STATUS_INPUT: i32 = 1;
pub const STATUS_INDETERMINATE: i32 = 2;
pub const STATUS_NUMERICAL: i32 = 3;

/// Default route-agreement tolerance for `eval`.
pub const DEFAULT_EVAL_TOL: f64 = 1e-10;
/// Default closed-form vs finite-difference tolerances by derivative order.
pub const DEFAULT_DERIVATIVE_TOLS: [f64; 3] = [1e-8, 1e-6, 5e-6];
pub const DEFAULT_GRID_POINTS: usize = 33;
const GRID_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Eval,
    EqualityCheck,
    HomogeneityClassify,
    DerivativeCheck,
    Moments,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::EqualityCheck => "equality-check",
            Command::HomogeneityClassify => "homogeneity-classify",
            Command::DerivativeCheck => "derivative-check",
            Command::Moments => "moments",
        }
    }
}

/// Command-line overrides; they take precedence over job-file values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    fn status(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => STATUS_NUMERICAL,
            _ => STATUS_INPUT,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDesc {
    pub f: Expr<f64>,
    pub g: Expr<f64>,
    pub interval: Interval<f64>,
    #[serde(default)]
    pub smoothness: Option<u8>,
}

impl PairDesc {
    fn build(&self) -> CliResult<GeneratorPair<f64>> {
        let p = GeneratorPair::new(self.f.clone(), self.g.clone(), self.interval);
        Ok(match self.smoothness {
            Some(n) => p.with_smoothness(n)?,
            None => p,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GiniDesc {
    Real { p: f64, q: f64 },
    Conjugate { a: f64, b: f64 },
}

impl GiniDesc {
    fn params(&self) -> CliResult<GiniParams<f64>> {
        Ok(match *self {
            GiniDesc::Real { p, q } => GiniParams::real(p, q),
            GiniDesc::Conjugate { a, b } => GiniParams::conjugate(a, b)?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyDesc {
    TwoPoint {},
    Projection { d: usize },
    WeightedArithmetic { phis: Vec<Expr<f64>> },
    WeightedTable { table: Vec<Vec<f64>> },
}

impl FamilyDesc {
    fn build(&self) -> CliResult<MeanFamily<f64>> {
        Ok(match self {
            FamilyDesc::TwoPoint {} => MeanFamily::two_point(),
            FamilyDesc::Projection { d } => MeanFamily::projection(*d)?,
            FamilyDesc::WeightedArithmetic { phis } => MeanFamily::weighted_arithmetic(phis.clone())?,
            FamilyDesc::WeightedTable { table } => MeanFamily::weighted_arithmetic_table(table.clone())?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDesc {
    /// `[[t, w], …]` on `[0, 1]`.
    DiracMix(Vec<(f64, f64)>),
    Dirac(f64),
    /// `(1 − s)δ₀ + sδ₁`.
    TwoPoint(f64),
    Uniform { nodes: usize },
    Counting { d: usize },
    Labels(Vec<f64>),
}

impl MeasureDesc {
    fn build(&self) -> CliResult<Measure<f64>> {
        Ok(match self {
            MeasureDesc::DiracMix(atoms) => Measure::dirac_mix(atoms)?,
            MeasureDesc::Dirac(c) => Measure::dirac(*c)?,
            MeasureDesc::TwoPoint(s) => Measure::two_point(*s)?,
            MeasureDesc::Uniform { nodes } => Measure::uniform_quadrature(*nodes)?,
            MeasureDesc::Counting { d } => Measure::counting(*d)?,
            MeasureDesc::Labels(w) => Measure::labels(w)?,
        })
    }
}

/// A parsed job file. Which fields are needed depends on the command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    /// Optional; must match the command given on the command line.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub pair: Option<PairDesc>,
    #[serde(default)]
    pub pair_b: Option<PairDesc>,
    #[serde(default)]
    pub gini: Option<GiniDesc>,
    /// Interval for `gini` and quasi-arithmetic jobs.
    #[serde(default)]
    pub interval: Option<Interval<f64>>,
    /// Quasi-arithmetic generators.
    #[serde(default)]
    pub f: Option<Expr<f64>>,
    #[serde(default)]
    pub g: Option<Expr<f64>>,
    #[serde(default)]
    pub family: Option<FamilyDesc>,
    #[serde(default)]
    pub measure: Option<MeasureDesc>,
    /// Points in `I^d` for `eval`.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    /// Diagonal points for `derivative-check`.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub order: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
}

/// Parses a job, reporting the offending field path and position.
pub fn parse_job(text: &str) -> CliResult<(Job, Value)> {
    let raw: Value = serde_json::from_str(text)
        .map_err(|e| input(format!("malformed job file: {e}")))?;
    let mut de = serde_json::Deserializer::from_str(text);
    let job: Job = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        input(format!("invalid job field `{path}`: {inner}"))
    })?;
    Ok((job, raw))
}

/// Effective settings after combining the job file and overrides.
#[derive(Debug, Clone, Copy)]
struct Settings {
    seed: u64,
    grid: usize,
    tol: Option<f64>,
}

fn settings(job: &Job, o: &Overrides) -> CliResult<Settings> {
    let seed = o.seed.or(job.seed).unwrap_or(0);
    let grid = o.grid.or(job.grid).unwrap_or(DEFAULT_GRID_POINTS);
    let tol = o.tol.or(job.tol);
    if grid == 0 {
        return Err(input("grid must be positive"));
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(input(format!("tol must be positive, got {t}")));
        }
    }
    Ok(Settings { seed, grid, tol })
}

/// Result of running one job.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: i32,
    pub table: String,
    pub report: Value,
}

impl Outcome {
    /// The machine-readable report, with every float at 17 significant digits.
    pub fn report_json(&self) -> String {
        let mut s = write_json(&self.report);
        s.push('\n');
        s
    }
}

fn status_name(status: i32) -> &'static str {
    match status {
        STATUS_OK => "completed",
        STATUS_INDETERMINATE => "indeterminate",
        STATUS_NUMERICAL => "numerical-failure",
        _ => "input-error",
    }
}

struct Partial {
    status: i32,
    rows: Vec<(String, String)>,
    result: Value,
    provenance: Map<String, Value>,
}

/// Runs `command` on the job text.
pub fn run(command: Command, job_text: &str, overrides: &Overrides) -> Outcome {
    let parsed = parse_job(job_text);
    let (raw, res) = match parsed {
        Ok((job, raw)) => {
            let res = settings(&job, overrides).and_then(|s| {
                if let Some(c) = &job.command {
                    if c != command.name() {
                        return Err(input(format!(
                            "job file is for `{c}` but `{}` was requested",
                            command.name()
                        )));
                    }
                }
                execute(command, &job, s).map(|p| (p, s))
            });
            (raw, res)
        }
        Err(e) => (Value::Null, Err(e)),
    };

    let mut report = Map::new();
    report.insert("command".into(), json!(command.name()));
    report.insert("job".into(), raw);
    let mut table = String::new();
    let _ = writeln!(table, "{:<30} {}", "command", command.name());
    let status = match res {
        Ok((p, s)) => {
            let mut prov = p.provenance;
            prov.insert("seed".into(), json!(s.seed));
            prov.insert("grid_points".into(), json!(s.grid));
            prov.insert("tol".into(), s.tol.map_or(Value::Null, |t| json!(t)));
            report.insert("provenance".into(), Value::Object(prov));
            report.insert("result".into(), p.result);
            for (k, v) in p.rows {
                if v.is_empty() {
                    let _ = writeln!(table, "{k}");
                } else {
                    let _ = writeln!(table, "{k:<30} {v}");
                }
            }
            p.status
        }
        Err(e) => {
            let status = e.status();
            report.insert("error".into(), json!(e.to_string()));
            let _ = writeln!(table, "{:<30} {}", "error", e);
            status
        }
    };
    report.insert("status".into(), json!(status));
    report.insert("status_name".into(), json!(status_name(status)));
    let _ = writeln!(table, "{:<30} {} ({})", "status", status, status_name(status));
    Outcome {
        status,
        table,
        report: Value::Object(report),
    }
}

fn execute(command: Command, job: &Job, s: Settings) -> CliResult<Partial> {
    match command {
        Command::Eval => run_eval(job, s),
        Command::EqualityCheck => run_equality(job, s),
        Command::HomogeneityClassify => run_homogeneity(job, s),
        Command::DerivativeCheck => run_derivatives(job, s),
        Command::Moments => run_moments(job),
    }
}

fn need<'a, T>(v: &'a Option<T>, field: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| input(format!("job field `{field}` is required for this command")))
}

fn family_and_measure(job: &Job) -> CliResult<(MeanFamily<f64>, Measure<f64>, Map<String, Value>)> {
    let fam = need(&job.family, "family")?.build()?;
    let mu = need(&job.measure, "measure")?.build()?;
    fam.validate(&mu)?;
    let mut prov = Map::new();
    prov.insert("dimension".into(), json!(fam.dim()));
    prov.insert("measure_nodes".into(), json!(mu.len()));
    prov.insert("measure_kind".into(), json!(format!("{:?}", mu.kind())));
    Ok((fam, mu, prov))
}

/// The pair for pair-based commands: `pair`, or the Gini pair of `gini` on `interval`.
fn primary_pair(job: &Job) -> CliResult<Option<(GeneratorPair<f64>, Option<GiniParams<f64>>)>> {
    match (&job.pair, &job.gini) {
        (Some(_), Some(_)) => Err(input("give either `pair` or `gini`, not both")),
        (Some(p), None) => Ok(Some((p.build()?, None))),
        (None, Some(g)) => {
            let params = g.params()?;
            let interval = *need(&job.interval, "interval")?;
            Ok(Some((params.generator_pair(interval)?, Some(params))))
        }
        (None, None) => Ok(None),
    }
}

fn fmt(v: f64) -> String {
    format_float(v)
}

fn fmt_vec(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(", "))
}

fn run_eval(job: &Job, s: Settings) -> CliResult<Partial> {
    let (fam, mu, prov) = family_and_measure(job)?;
    let points = need(&job.points, "points")?;
    if points.is_empty() {
        return Err(input("`points` is empty"));
    }
    let tol = s.tol.unwrap_or(DEFAULT_EVAL_TOL);
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut worst = 0.0f64;

    if job.pair.is_none() && job.gini.is_none() {
        let f = need(&job.f, "pair, gini or f")?;
        for x in points {
            let v = eval_quasi_arithmetic(f, &fam, &mu, x)?;
            rows.push((format!("point {}", fmt_vec(x)), String::new()));
            rows.push(("  quasi_arithmetic".into(), fmt(v)));
            out.push(json!({"x": x, "quasi_arithmetic": v}));
        }
        return Ok(Partial {
            status: STATUS_OK,
            rows,
            result: json!({"points": out}),
            provenance: prov,
        });
    }

    let (pair, gini) = primary_pair(job)?.expect("checked above");
    let mean = Mean::new(&pair, &fam, &mu)?;
    for x in points {
        let implicit = mean.implicit(x)?;
        let explicit = if mean.is_normalized() { Some(mean.explicit(x)?) } else { None };
        let closed = match &gini {
            Some(p) => Some(eval_gini_closed(p, &fam, &mu, x)?),
            None => None,
        };
        let mut values = vec![implicit];
        values.extend(explicit);
        values.extend(closed.map(|c| c.value));
        let scale = 1.0 + values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let spread = values.iter().fold(0.0f64, |a, &v| a.max(v)) - values.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let discrepancy = spread / scale;
        worst = worst.max(discrepancy);

        rows.push((format!("point {}", fmt_vec(x)), String::new()));
        rows.push(("  implicit".into(), fmt(implicit)));
        rows.push((
            "  explicit".into(),
            explicit.map_or("n/a (pair not normalized)".into(), fmt),
        ));
        if let Some(c) = closed {
            rows.push(("  closed_form".into(), fmt(c.value)));
            if let Some(d) = c.conjugate_denominator {
                rows.push(("  conjugate_denominator".into(), fmt(d)));
            }
        }
        rows.push(("  discrepancy".into(), fmt(discrepancy)));
        out.push(json!({
            "x": x,
            "implicit": implicit,
            "explicit": explicit,
            "closed_form": closed.map(|c| c.value),
            "conjugate_denominator": closed.and_then(|c| c.conjugate_denominator),
            "discrepancy": discrepancy,
        }));
    }
    let ok = worst <= tol;
    rows.push(("max_discrepancy".into(), fmt(worst)));
    rows.push(("route_tolerance".into(), fmt(tol)));
    Ok(Partial {
        status: if ok { STATUS_OK } else { STATUS_NUMERICAL },
        rows,
        result: json!({
            "points": out,
            "max_discrepancy": worst,
            "route_tolerance": tol,
            "routes_agree": ok,
            "normalized": mean.is_normalized(),
            "gini": gini,
        }),
        provenance: prov,
    })
}

fn grid_on(interval: &Interval<f64>, n: usize) -> Vec<f64> {
    interval.chebyshev_grid(n, GRID_MARGIN)
}

fn decision_partial(report: DecisionReport<f64>, mut prov: Map<String, Value>) -> CliResult<Partial> {
    let mut rows = vec![("verdict".to_string(), report.verdict.name().to_string())];
    if let Verdict::Homogeneous { params } = report.verdict {
        rows.push(("gini_parameters".into(), gini_text(&params)));
    } else if let Some(p) = report.gini {
        rows.push(("characteristic_roots".into(), gini_text(&p)));
    }
    for c in &report.conditions {
        let thr = c.threshold.map_or(String::new(), |t| format!(" (threshold {})", fmt(t)));
        let mark = if c.threshold.is_none() {
            ""
        } else if c.passed {
            " pass"
        } else {
            " FAIL"
        };
        rows.push((format!("check {}", c.name), format!("{}{}{}", fmt(c.value), thr, mark)));
    }
    if let Some(w) = &report.witness {
        rows.push((
            "witness".into(),
            format!("alpha={} beta={} gamma={} delta={}", fmt(w.alpha), fmt(w.beta), fmt(w.gamma), fmt(w.delta)),
        ));
    }
    if let Some([a, b]) = report.affine {
        rows.push(("affine g = a f + b".into(), format!("a={} b={}", fmt(a), fmt(b))));
    }
    if let Some(c) = &report.counterexample {
        let lam = c.lambda.map_or(String::new(), |l| format!("lambda={} ", fmt(l)));
        rows.push(("counterexample".into(), format!("{lam}x={}", fmt_vec(&c.x))));
        rows.push(("  lhs / rhs / gap".into(), format!("{} / {} / {}", fmt(c.lhs), fmt(c.rhs), fmt(c.gap))));
    }
    for n in &report.notes {
        rows.push(("note".into(), n.clone()));
    }
    rows.push(("grid".into(), format!("{} points on [{}, {}]", report.grid.len(), fmt(report.grid[0]), fmt(report.grid[report.grid.len() - 1]))));
    let status = if report.is_indeterminate() { STATUS_INDETERMINATE } else { STATUS_OK };
    prov.insert("grid".into(), json!(report.grid));
    let result = serde_json::to_value(&report).map_err(|e| input(format!("serializing report: {e}")))?;
    Ok(Partial {
        status,
        rows,
        result: json!({"verdict": report.verdict.name(), "report": result}),
        provenance: prov,
    })
}

fn gini_text(p: &GiniParams<f64>) -> String {
    match *p {
        GiniParams::RealDistinct { p, q } => format!("p={} q={}", fmt(p), fmt(q)),
        GiniParams::RealEqual { p } => format!("p=q={}", fmt(p)),
        GiniParams::Conjugate { a, b } => format!("a={} b={} (p,q = a ± bi)", fmt(a), fmt(b)),
    }
}

fn run_equality(job: &Job, s: Settings) -> CliResult<Partial> {
    let (fam, mu, prov) = family_and_measure(job)?;
    if let (Some(f), Some(g)) = (&job.f, &job.g) {
        let interval = need(&job.interval, "interval")?;
        let grid = grid_on(interval, s.grid);
        return decision_partial(decide_equality_qa(f, g, &fam, &mu, &grid)?, prov);
    }
    let (a, _) = primary_pair(job)?.ok_or_else(|| input("job field `pair` (or `f` and `g`) is required"))?;
    let b = need(&job.pair_b, "pair_b")?.build()?;
    let lo = a.interval().lo().max(b.interval().lo());
    let hi = a.interval().hi().min(b.interval().hi());
    let common = Interval::new(lo, hi).map_err(|_| input("the two pairs have disjoint intervals"))?;
    let grid = grid_on(&common, s.grid);
    decision_partial(decide_equality(&a, &b, &fam, &mu, &grid)?, prov)
}

fn run_homogeneity(job: &Job, s: Settings) -> CliResult<Partial> {
    let (fam, mu, prov) = family_and_measure(job)?;
    if let Some((pair, _)) = primary_pair(job)? {
        let grid = grid_on(pair.interval(), s.grid);
        return decision_partial(classify_homogeneous(&pair, &fam, &mu, &grid, s.seed)?, prov);
    }
    let f = need(&job.f, "pair, gini or f")?;
    let interval = need(&job.interval, "interval")?;
    let grid = grid_on(interval, s.grid);
    decision_partial(classify_homogeneous_qa(f, &fam, &mu, &grid, s.seed)?, prov)
}

fn run_derivatives(job: &Job, s: Settings) -> CliResult<Partial> {
    let (fam, mu, prov) = family_and_measure(job)?;
    let (pair, _) = primary_pair(job)?.ok_or_else(|| input("job field `pair` (or `gini`) is required"))?;
    let xs = need(&job.x, "x")?;
    let order = job.order.unwrap_or(3);
    if !(1..=3).contains(&order) {
        return Err(input(format!("order must be 1, 2 or 3, got {order}")));
    }
    let tols = match s.tol {
        Some(t) => [t; 3],
        None => DEFAULT_DERIVATIVE_TOLS,
    };
    let mut rows = vec![(
        "order indices".to_string(),
        format!("{:<26} {:<26} {}", "closed-form", "finite-difference", "rel-error"),
    )];
    let mut out = Vec::new();
    let mut all_ok = true;
    for &x in xs {
        rows.push((format!("x = {}", fmt(x)), String::new()));
        for r in derivative_check(&pair, &fam, &mu, x, order)? {
            let tol = tols[r.indices.len() - 1];
            let ok = r.deviation <= tol;
            all_ok &= ok;
            let idx = r.indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            rows.push((
                format!("  {} ({idx})", r.indices.len()),
                format!(
                    "{:<26} {:<26} {}{}",
                    fmt(r.closed_form),
                    fmt(r.finite_difference),
                    fmt(r.deviation),
                    if ok { "" } else { " FAIL" }
                ),
            ));
            out.push(json!({
                "x": x,
                "order": r.indices.len(),
                "indices": r.indices,
                "closed_form": r.closed_form,
                "finite_difference": r.finite_difference,
                "relative_error": r.deviation,
                "tolerance": tol,
                "passed": ok,
            }));
        }
    }
    Ok(Partial {
        status: if all_ok { STATUS_OK } else { STATUS_NUMERICAL },
        rows,
        result: json!({"rows": out, "order": order, "tolerances": tols, "all_passed": all_ok}),
        provenance: prov,
    })
}

fn run_moments(job: &Job) -> CliResult<Partial> {
    let mu = need(&job.measure, "measure")?.build()?;
    let mut prov = Map::new();
    prov.insert("measure_nodes".into(), json!(mu.len()));
    prov.insert("measure_kind".into(), json!(format!("{:?}", mu.kind())));
    let total: f64 = mu.weights().iter().sum();
    let mut rows = vec![
        ("nodes".to_string(), mu.len().to_string()),
        ("weight_sum".to_string(), fmt(total)),
    ];
    let mut result = Map::new();
    result.insert("nodes".into(), json!(mu.nodes().iter().map(|n| n.to_string()).collect::<Vec<_>>()));
    result.insert("weights".into(), json!(mu.weights()));
    result.insert("weight_sum".into(), json!(total));
    if let ParameterSpace::UnitInterval = mu.space() {
        let m1 = mu.first_moment()?;
        let m2 = mu.central_moment(2)?;
        let m3 = mu.central_moment(3)?;
        rows.push(("first_moment".into(), fmt(m1)));
        rows.push(("central_moment_2".into(), fmt(m2)));
        rows.push(("central_moment_3".into(), fmt(m3)));
        result.insert("first_moment".into(), json!(m1));
        result.insert("central_moment_2".into(), json!(m2));
        result.insert("central_moment_3".into(), json!(m3));
    } else {
        rows.push(("moments".into(), "n/a (label measure)".into()));
    }
    Ok(Partial {
        status: STATUS_OK,
        rows,
        result: Value::Object(result),
        provenance: prov,
    })
}

/// A float with 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Compact, deterministic JSON (sorted keys) with floats at 17 significant digits.
pub fn write_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            if a.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 1);
                if i + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}
