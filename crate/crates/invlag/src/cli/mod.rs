//! The `invlag` command line: problem files in, text or JSON reports out.
//!
//! Exit codes: 0 pass, 1 fail, 2 usage or parse error, 3 definitively no
//! nonsingular solution, 4 search exhausted without a verdict.

pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::conditions::{self, Cell, ConditionReport, Suite};
use crate::crosscheck::{self, NumericCheck, Sampler};
use crate::expr::{record_derivatives, Expr, ExprContext, Rational};
use crate::geometry::SodeGeometry;
use crate::reconstruct::{self, Certificate, Force, ReconstructError};
use crate::solver::{self, SearchOptions, SearchOutcome};
use crate::tensor::TensorField;
use problem::{parse_rational, parse_suite, Problem, ProblemFile, System};
use report::{certificate_json, crosscheck_json, expr_json, matrix_strings, report_json, tensor_json};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONE: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;

/// Random points per passing cell in the numeric cross-check.
const CROSSCHECK_POINTS: usize = 5;
/// Derivative computations sampled for the finite-difference check.
const DERIVATIVE_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}:{line}:{column}: {message}")]
    Json { file: String, line: usize, column: usize, message: String },
    #[error("{file}{}: {field}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse { file: String, field: String, line: Option<usize>, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("the problem has no {0} section")]
    Missing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Print Γ, Φ, R and θ of the system.
    Analyze,
    /// Run a condition suite on the candidate data.
    Check,
    /// Search the ansatz family for a nonsingular multiplier.
    Solve,
    /// Build (L, D) or (L, ω) from the candidate multiplier.
    Reconstruct,
    /// Check the Lagrange equations of the candidate (L, D) or (L, ω).
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "invlag", version, about = "Helmholtz conditions with dissipative and gyroscopic forces")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file (JSON).
    pub file: PathBuf,
    /// Condition suite: classical, dissipative, gyroscopic, thm3, thm4, prop2a, rayleigh, implicit.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// With verify: rebuild f from the candidate and compare with the file.
    #[arg(long)]
    pub forward: bool,
    /// Coefficient bound for the nonsingular-representative search.
    #[arg(long)]
    pub bound: Option<u32>,
    /// Replace parameters by rationals before any computation.
    #[arg(long, num_args = 1.., value_name = "NAME=P/Q")]
    pub instantiate: Vec<String>,
    /// Write the JSON report (or, for reconstruct, the certificate as a problem file).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use a named candidate from options.candidates instead of the top-level one.
    #[arg(long)]
    pub candidate: Option<String>,
}

/// The result of one command, before rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: i32,
    pub text: String,
    pub json: Value,
    /// For reconstruct: the certificate as a problem file.
    pub certificate: Option<ProblemFile>,
}

fn status_name(exit: i32) -> &'static str {
    match exit {
        EXIT_PASS => "pass",
        EXIT_FAIL => "fail",
        EXIT_NONE => "none",
        EXIT_EXHAUSTED => "exhausted",
        _ => "error",
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Analyze => "analyze",
        Command::Check => "check",
        Command::Solve => "solve",
        Command::Reconstruct => "reconstruct",
        Command::Verify => "verify",
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `out`; diagnostics go to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let file_name = args.file.display().to_string();
    let raw = std::fs::read_to_string(&args.file).map_err(|e| CliError::Io { path: file_name.clone(), message: e.to_string() });
    let format = args.format.or_else(|| {
        let raw = raw.as_ref().ok()?;
        let v: Value = serde_json::from_str(raw).ok()?;
        match v.pointer("/options/format")?.as_str()? {
            "json" => Some(Format::Json),
            "text" => Some(Format::Text),
            _ => None,
        }
    });
    let format = format.unwrap_or(Format::Text);
    let result = raw.and_then(|raw| execute(&args, &file_name, &raw));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "invlag: {e}");
            Outcome {
                exit: EXIT_USAGE,
                text: String::new(),
                json: json!({"error": e.to_string()}),
                certificate: None,
            }
        }
    };
    let mut doc = match outcome.json.clone() {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    doc.insert("command".into(), json!(command_name(args.command)));
    doc.insert("file".into(), json!(file_name));
    doc.insert("status".into(), json!(status_name(outcome.exit)));
    doc.insert("exit_code".into(), json!(outcome.exit));
    let doc = Value::Object(doc);
    let _ = match format {
        Format::Text => write!(out, "{}", outcome.text),
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable")),
    };
    if let Some(path) = &args.out {
        let body = match &outcome.certificate {
            Some(cert) => serde_json::to_string_pretty(cert).expect("serializable"),
            None => serde_json::to_string_pretty(&doc).expect("serializable"),
        };
        if let Err(e) = std::fs::write(path, body + "\n") {
            let _ = writeln!(err, "invlag: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    outcome.exit
}

fn parse_instantiations(items: &[String]) -> Result<Vec<(String, Rational)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, value) = item.split_once('=').ok_or_else(|| CliError::Usage(format!("--instantiate expects NAME=P/Q, got '{item}'")))?;
            let r = parse_rational(value).ok_or_else(|| CliError::Usage(format!("--instantiate {name}: '{value}' is not a rational")))?;
            Ok((name.trim().to_string(), r))
        })
        .collect()
}

/// Runs a command on the problem text without touching the filesystem.
pub fn execute(args: &Args, file_name: &str, raw: &str) -> Result<Outcome, CliError> {
    let inst = parse_instantiations(&args.instantiate)?;
    let suite = args.suite.as_deref().map(parse_suite).transpose()?;
    let ansatz_suite = if args.command == Command::Solve { suite } else { None };
    let problem = Problem::load(file_name, raw, args.candidate.as_deref(), &inst, ansatz_suite)?;
    let file_suite = problem.file.options.suite.as_deref().map(parse_suite).transpose()?;
    match args.command {
        Command::Analyze => analyze(&problem),
        Command::Check => check(&problem, suite.or(file_suite)),
        Command::Solve => solve(&problem, args.bound),
        Command::Reconstruct => reconstruct_cmd(&problem, suite.or(file_suite)),
        Command::Verify => verify(&problem, args.forward),
    }
}

fn geometry(p: &Problem) -> Result<SodeGeometry, CliError> {
    SodeGeometry::new(p.sode()?).map_err(|e| CliError::Invalid(e.to_string()))
}

fn header(p: &Problem) -> String {
    let mut s = format!("system {} (n = {}", p.name, p.ctx.n());
    if !p.ctx.parameters().is_empty() {
        let _ = write!(s, ", parameters {}", p.ctx.parameters().join(", "));
    }
    if let Some(c) = &p.candidate_name {
        let _ = write!(s, ", candidate {c}");
    }
    s.push_str(")\n");
    s
}

fn section(text: &mut String, title: &str, t: &TensorField, ctx: &ExprContext) {
    let _ = writeln!(text, "{title}:");
    for line in t.display(ctx).to_string().lines() {
        let _ = writeln!(text, "  {line}");
    }
}

fn analyze(p: &Problem) -> Result<Outcome, CliError> {
    let geo = geometry(p)?;
    let ctx = &p.ctx;
    let mut text = header(p);
    for (i, f) in geo.sode.f().iter().enumerate() {
        let _ = writeln!(text, "f[{}] = {}", i + 1, ctx.display(f));
    }
    section(&mut text, "connection Gamma[i,j] = Γ^i_j", &geo.connection, ctx);
    section(&mut text, "Jacobi endomorphism Phi[i,j] = Φ^i_j", &geo.jacobi, ctx);
    section(&mut text, "curvature R[k,i,j] = R^k_ij", &geo.curvature, ctx);
    section(&mut text, "theta[l,j,k] = V_k(Γ^l_j)", &geo.theta, ctx);
    let json = json!({
        "f": geo.sode.f().iter().map(|e| ctx.print(e)).collect::<Vec<_>>(),
        "connection": tensor_json(&geo.connection, ctx),
        "jacobi": tensor_json(&geo.jacobi, ctx),
        "curvature": tensor_json(&geo.curvature, ctx),
        "theta": tensor_json(&geo.theta, ctx),
    });
    Ok(Outcome { exit: EXIT_PASS, text, json, certificate: None })
}

fn need<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Missing(what.into()))
}

/// Exact evaluation of passing cells at random points, and finite
/// differences on the derivatives taken while building the report.
fn numeric_crosscheck(report: &ConditionReport, samples: &[crate::expr::DerivativeSample]) -> (NumericCheck, NumericCheck) {
    let mut sampler = Sampler::from_env();
    let cells = crosscheck::crosscheck_report(report, &mut sampler, CROSSCHECK_POINTS);
    let derivs = crosscheck::crosscheck_derivatives(samples, &mut sampler);
    (cells, derivs)
}

/// Renders a report with its cross-check; a failed cross-check fails.
fn report_outcome(p: &Problem, report: ConditionReport, samples: &[crate::expr::DerivativeSample], mut text: String, mut json: Map<String, Value>) -> Outcome {
    let (cells, derivs) = numeric_crosscheck(&report, samples);
    let checked_ok = cells.ok() && derivs.ok();
    let _ = write!(text, "{}", report.display(&p.ctx));
    let _ = writeln!(
        text,
        "numeric cross-check: {} cells at {} points, {} derivatives: {}",
        cells.checked,
        CROSSCHECK_POINTS,
        derivs.checked,
        if checked_ok { "ok" } else { "MISMATCH" }
    );
    for f in cells.failures.iter().chain(&derivs.failures) {
        let _ = writeln!(text, "  mismatch: {f}");
    }
    json.insert("report".into(), report_json(&report, &p.ctx));
    json.insert("crosscheck".into(), crosscheck_json(CROSSCHECK_POINTS, &cells, &derivs));
    let exit = if report.pass && checked_ok { EXIT_PASS } else { EXIT_FAIL };
    Outcome { exit, text, json: Value::Object(json), certificate: None }
}

fn run_suite(p: &Problem, suite: Suite) -> Result<ConditionReport, CliError> {
    let c = &p.candidate;
    if suite == Suite::Implicit {
        return match &p.system {
            System::Implicit(sys) => Ok(conditions::check_implicit(sys)),
            System::Explicit(_) => Err(CliError::Usage("suite implicit needs an implicit-mode problem".into())),
        };
    }
    let geo = geometry(p)?;
    let g = need(&c.g, "g")?;
    let r = match suite {
        Suite::Dissipative => conditions::check_dissipative(&geo, g, need(&c.d, "D")?),
        Suite::Gyroscopic => conditions::check_gyroscopic(&geo, g, need(&c.omega, "omega")?),
        Suite::Classical => conditions::check_classical(&geo, g),
        Suite::Thm3 => conditions::check_multiplier_dissipative(&geo, g),
        Suite::Thm4 => conditions::check_multiplier_gyroscopic(&geo, g),
        Suite::Prop2a => conditions::check_prop2a(&geo, g),
        Suite::Rayleigh => conditions::check_rayleigh(&geo, g),
        Suite::Implicit => unreachable!("handled above"),
    };
    r.map_err(|e| CliError::Invalid(e.to_string()))
}

fn check(p: &Problem, suite: Option<Suite>) -> Result<Outcome, CliError> {
    let suite = suite.ok_or_else(|| CliError::Usage("check needs --suite (or options.suite)".into()))?;
    let (report, samples) = record_derivatives(DERIVATIVE_SAMPLES, crosscheck::seed_from_env(), || run_suite(p, suite));
    let report = report?;
    Ok(report_outcome(p, report, &samples, header(p), Map::new()))
}

fn solve(p: &Problem, bound: Option<u32>) -> Result<Outcome, CliError> {
    let (ansatz, file_bound) = need(&p.ansatz, "ansatz")?;
    let geo = geometry(p)?;
    let ctx = &p.ctx;
    let invalid = |e: solver::SolverError| CliError::Invalid(e.to_string());
    let (system, space) = solver::solve_problem(&geo, ansatz).map_err(invalid)?;
    let opts = SearchOptions { bound: bound.or(*file_bound).unwrap_or(SearchOptions::default().bound), seed: crosscheck::seed_from_env(), ..Default::default() };
    let outcome = solver::find_nonsingular(&geo, ansatz, &space, opts).map_err(invalid)?;

    let mut text = header(p);
    let _ = writeln!(text, "suite {}", ansatz.suite);
    let _ = writeln!(text, "unknowns {}, equations {}, rank {}", system.unknowns.len(), system.equations.len(), space.rank);
    if let Some(origin) = &space.inconsistency {
        let _ = writeln!(text, "inconsistent: equation from {origin} reduces to 0 = c with c ≠ 0");
    }
    let _ = writeln!(text, "solution space dimension {}", space.dimension());
    let forced = solver::forced_zero_entries(ansatz, &space);
    let forced_names: Vec<String> = forced.iter().map(|(i, j)| format!("g[{},{}]", i + 1, j + 1)).collect();
    if !forced.is_empty() {
        let _ = writeln!(text, "entries forced to zero: {}", forced_names.join(", "));
    }
    let mut basis_json = Vec::new();
    if let Some(part) = &space.particular {
        if part.iter().any(|c| !num_traits::Zero::is_zero(c)) {
            let (g, w) = ansatz.instantiate(part);
            section(&mut text, "particular solution g", &g, ctx);
            if let Some(w) = &w {
                section(&mut text, "particular solution omega", w, ctx);
            }
        }
        for (k, b) in space.basis.iter().enumerate() {
            let values: Vec<Expr> = b.iter().map(|c| Expr::constant(c.clone())).collect();
            let (g, w) = ansatz.instantiate_with(&values, false);
            section(&mut text, &format!("basis {} g", k + 1), &g, ctx);
            let mut entry = Map::new();
            entry.insert("coefficients".into(), json!(b.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
            entry.insert("g".into(), tensor_json(&g, ctx));
            if let Some(w) = &w {
                section(&mut text, &format!("basis {} omega", k + 1), w, ctx);
                entry.insert("omega".into(), tensor_json(w, ctx));
            }
            basis_json.push(Value::Object(entry));
        }
    }
    let mut json = Map::new();
    json.insert("suite".into(), json!(ansatz.suite.name()));
    json.insert("unknowns".into(), json!(system.unknowns));
    json.insert("equations".into(), json!(system.equations.len()));
    json.insert("rank".into(), json!(space.rank));
    json.insert("consistent".into(), json!(space.is_consistent()));
    json.insert("dimension".into(), json!(space.dimension()));
    json.insert("forced_zero".into(), json!(forced_names));
    json.insert("basis".into(), Value::Array(basis_json));
    let exit = match &outcome {
        SearchOutcome::Found(rep) => {
            let _ = writeln!(text, "representative (combination {:?}):", rep.combination);
            section(&mut text, "g", &rep.g, ctx);
            let mut r = Map::new();
            r.insert("combination".into(), json!(rep.combination));
            r.insert("g".into(), tensor_json(&rep.g, ctx));
            if let Some(w) = &rep.omega {
                section(&mut text, "omega", w, ctx);
                r.insert("omega".into(), tensor_json(w, ctx));
            }
            let _ = writeln!(text, "det g = {}", ctx.display(&rep.det));
            r.insert("det".into(), expr_json(&rep.det, ctx));
            r.insert("report".into(), report_json(&rep.report, ctx));
            json.insert("representative".into(), Value::Object(r));
            let _ = writeln!(text, "verdict: nonsingular multiplier found");
            EXIT_PASS
        }
        SearchOutcome::StructurallySingular(reason) => {
            let _ = writeln!(text, "verdict: no nonsingular solution ({reason})");
            json.insert("reason".into(), json!(reason));
            EXIT_NONE
        }
        SearchOutcome::Exhausted { tried, bound, capped } => {
            let why = if *capped { "search cap reached" } else { "box exhausted" };
            let _ = writeln!(text, "verdict: inconclusive, no nonsingular member with coefficients in [-{bound}, {bound}] ({tried} tried, {why})");
            json.insert("search".into(), json!({"tried": tried, "bound": bound, "capped": capped}));
            EXIT_EXHAUSTED
        }
    };
    Ok(Outcome { exit, text, json: Value::Object(json), certificate: None })
}

fn certificate_file(p: &Problem, cert: &Certificate) -> ProblemFile {
    let ctx = &p.ctx;
    let mut file = p.file.clone();
    file.ansatz = None;
    file.options.candidates.clear();
    file.options.suite = None;
    file.g = Some(matrix_strings(&reconstruct::hessian(&cert.lagrangian, ctx.n()), ctx));
    file.l = Some(ctx.print(&cert.lagrangian));
    match &cert.force {
        Force::Dissipation(d) => {
            file.d = Some(ctx.print(d));
            file.omega = None;
        }
        Force::Gyroscopic(w) => {
            file.omega = Some(matrix_strings(w, ctx));
            file.d = None;
        }
    }
    file
}

fn reconstruct_cmd(p: &Problem, suite: Option<Suite>) -> Result<Outcome, CliError> {
    let geo = geometry(p)?;
    let g = need(&p.candidate.g, "g")?;
    let gyroscopic = match suite.unwrap_or(Suite::Thm3) {
        Suite::Thm3 | Suite::Dissipative => false,
        Suite::Thm4 | Suite::Gyroscopic => true,
        other => return Err(CliError::Usage(format!("reconstruct supports thm3/dissipative or thm4/gyroscopic, not {other}"))),
    };
    let mut text = header(p);
    let result = if gyroscopic { reconstruct::reconstruct_gyroscopic(&geo, g) } else { reconstruct::reconstruct_dissipative(&geo, g) };
    let cert = match result {
        Ok(c) => c,
        Err(e @ (ReconstructError::Condition(_) | ReconstructError::Geometry(_) | ReconstructError::Expr(_))) => {
            return Err(CliError::Invalid(e.to_string()));
        }
        Err(e) => {
            let _ = writeln!(text, "no certificate: {e}");
            let mut json = Map::new();
            json.insert("error".into(), json!(e.to_string()));
            if let ReconstructError::Precondition { .. } = e {
                let report = if gyroscopic { conditions::check_multiplier_gyroscopic(&geo, g) } else { conditions::check_multiplier_dissipative(&geo, g) }
                    .map_err(|e| CliError::Invalid(e.to_string()))?;
                let _ = write!(text, "{}", report.display(&p.ctx));
                json.insert("report".into(), report_json(&report, &p.ctx));
            }
            return Ok(Outcome { exit: EXIT_FAIL, text, json: Value::Object(json), certificate: None });
        }
    };
    let _ = write!(text, "{}", cert.display(&p.ctx));
    let mut json = Map::new();
    json.insert("certificate".into(), certificate_json(&cert, &p.ctx));
    let (report, samples) = record_derivatives(DERIVATIVE_SAMPLES, crosscheck::seed_from_env(), || cert.verify(&geo.sode));
    let report = report.map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut out = report_outcome(p, report, &samples, text, json);
    out.certificate = Some(certificate_file(p, &cert));
    Ok(out)
}

fn verify(p: &Problem, forward: bool) -> Result<Outcome, CliError> {
    let s = p.sode()?;
    let c = &p.candidate;
    let l = need(&c.l, "L")?;
    let invalid = |e: ReconstructError| CliError::Invalid(e.to_string());
    let (result, samples) = record_derivatives(DERIVATIVE_SAMPLES, crosscheck::seed_from_env(), || -> Result<_, CliError> {
        let mut report = match (&c.omega, &c.d) {
            (Some(w), _) => reconstruct::verify_gyroscopic(s, l, w).map_err(invalid)?,
            (None, Some(d)) => reconstruct::verify_dissipative(s, l, d),
            (None, None) => return Err(CliError::Missing("D or omega".into())),
        };
        if forward {
            let rebuilt = match &c.omega {
                Some(w) => reconstruct::forward_gyroscopic(&p.ctx, l, w),
                None => reconstruct::forward_sode(&p.ctx, l, c.d.as_ref().expect("checked")),
            };
            let mut cells = std::mem::take(&mut report.cells);
            let mut notes = std::mem::take(&mut report.notes);
            match rebuilt {
                Ok(f) => {
                    for (i, (a, b)) in s.f().iter().zip(f.f()).enumerate() {
                        cells.push(Cell::zero(format!("Forward[{}]", i + 1), vec![a.clone(), -b.clone()]));
                    }
                }
                Err(ReconstructError::Singular) => notes.push("forward: the Hessian of L is singular, so f cannot be rebuilt".into()),
                Err(ReconstructError::Internal(m)) => {
                    notes.push(format!("forward: {m}"));
                    cells.push(Cell::nonzero("Forward", Expr::zero()));
                }
                Err(e) => return Err(invalid(e)),
            }
            report = ConditionReport { notes, ..ConditionReport::new(report.suite.clone(), cells) };
        }
        Ok(report)
    });
    Ok(report_outcome(p, result?, &samples, header(p), Map::new()))
}
