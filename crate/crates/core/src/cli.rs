//! Command-line front end. [`run`] takes the argument vector and two output
//! streams and returns the process exit code, so it can be driven from tests.
//!
//! Exit codes: 0 on success, 1 on a numerical failure, 2 on a configuration or
//! parse error, 3 on non-convergence when `--strict` is set.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dual::{
    apply_functional, basis_element, functional_norm, norm_witness, to_ell1, DualRep, IsolatedScale,
};
use crate::error::Error;
use crate::expr::{self, Expr};
use crate::function::ScaleFunction;
use crate::integrate::DeltaIntegrator;
use crate::kernel::{regularity_report, Kernel, RegularityConfig, RegularityVerdict, XProbe};
use crate::operator::{
    builtin_operator, extract_kernel, verify_reconstruction, KernelOperator,
    LinearOperator,
};
use crate::scale::{ScaleDescriptor, TimeScale};
use crate::spaces::{limit_at_infinity, membership_report, LimitConfig, MembershipConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tscale",
    version,
    about = "Delta-integrals on time scales and kernel transforms between convergent-function spaces",
    args_override_self = true
)]
struct Cli {
    /// Print machine-readable JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Include partitions, truncation targets and probe witnesses.
    #[arg(long, global = true)]
    trace: bool,
    /// Exit with code 3 when a computation does not converge.
    #[arg(long, global = true)]
    strict: bool,
    /// JSON file whose keys mirror the command-line flags; flags given on the
    /// command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounded integral of f over [a, b].
    #[command(allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Improper integral of f over [a, inf).
    #[command(allow_negative_numbers = true)]
    Improper(ImproperArgs),
    /// Evaluate (Lf)(x) on an x-grid.
    #[command(allow_negative_numbers = true)]
    Transform(TransformArgs),
    /// Probe the conditions under which the kernel preserves limits.
    #[command(allow_negative_numbers = true)]
    Regularity(RegularityArgs),
    /// Functionals b lim f + sum b_n f(t_n) on an isolated scale.
    Dual {
        #[command(subcommand)]
        action: DualAction,
    },
    /// Recover the kernel of a linear operator on an isolated scale.
    #[command(allow_negative_numbers = true)]
    ExtractKernel(ExtractArgs),
    /// Inspect a time scale or a function on it.
    Scale {
        #[command(subcommand)]
        action: ScaleAction,
    },
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    /// Time-scale JSON descriptor, or reals / integers / hybrid.
    #[arg(long, value_parser = parse_scale)]
    scale: ScaleArg,
    /// Integrand, an expression in t.
    #[arg(long, value_parser = parse_expression)]
    f: Expr,
    /// Lower bound, a point of the scale.
    #[arg(long)]
    a: f64,
    /// Upper bound; must not be below a.
    #[arg(long)]
    b: f64,
    /// Absolute error target.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ImproperArgs {
    #[arg(long, value_parser = parse_scale)]
    scale: ScaleArg,
    #[arg(long, value_parser = parse_expression)]
    f: Expr,
    /// Lower bound; the integral runs to infinity.
    #[arg(long)]
    a: f64,
    /// Stall threshold for the increments between doubling targets.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct KernelSpec {
    /// Kernel, an expression in x and t.
    #[arg(long, value_parser = parse_expression)]
    kernel: Expr,
    #[arg(long, value_parser = parse_scale, default_value = "integers")]
    xscale: ScaleArg,
    #[arg(long, value_parser = parse_scale, default_value = "integers")]
    tscale: ScaleArg,
    /// Left end of the x-domain; defaults to the minimum of the x-scale.
    #[arg(long)]
    alpha: Option<f64>,
    /// Left end of the t-domain; defaults to the minimum of the t-scale.
    #[arg(long)]
    beta: Option<f64>,
}

impl KernelSpec {
    fn build(&self) -> Result<Kernel, Error> {
        let xs = &self.xscale.scale;
        let ts = &self.tscale.scale;
        let alpha = self.alpha.unwrap_or_else(|| xs.min());
        let beta = self.beta.unwrap_or_else(|| ts.min());
        self.kernel.to_kernel(xs.clone(), alpha, ts.clone(), beta)
    }
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    kernel: KernelSpec,
    /// Input function, an expression in t.
    #[arg(long, value_parser = parse_expression)]
    f: Expr,
    /// Comma-separated x values; defaults to alpha, alpha+1, alpha+2, alpha+4, ... up to the horizon.
    #[arg(long, value_delimiter = ',')]
    xs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 65536.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Also diagnose the limit of Lf at the horizon.
    #[arg(long)]
    limit: bool,
}

#[derive(Args, Debug)]
struct RegularityArgs {
    #[command(flatten)]
    kernel: KernelSpec,
    #[arg(long, default_value_t = 65536.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Number of t values probed for condition (iii).
    #[arg(long, default_value_t = 8)]
    y_count: usize,
}

#[derive(Args, Debug)]
struct IsolatedSpec {
    /// Isolated time scale; every point from beta on must be isolated.
    #[arg(long, value_parser = parse_scale, default_value = "integers")]
    scale: ScaleArg,
    #[arg(long)]
    beta: Option<f64>,
}

impl IsolatedSpec {
    fn build(&self) -> Result<IsolatedScale, Error> {
        let s = &self.scale.scale;
        IsolatedScale::new(s.clone(), self.beta.unwrap_or_else(|| s.min()))
    }
}

#[derive(Subcommand, Debug)]
enum DualAction {
    /// F(f) for a function f with a limit.
    #[command(allow_negative_numbers = true)]
    Apply {
        /// {"b": .., "coeffs": [..]}
        #[arg(long, value_parser = parse_rep)]
        rep: DualRep,
        #[arg(long, value_parser = parse_expression)]
        f: Expr,
        #[command(flatten)]
        scale: IsolatedSpec,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// ||F|| = |b| + sum |b_n| and the l1 image.
    Norm {
        #[arg(long, value_parser = parse_rep)]
        rep: DualRep,
    },
    /// The norm-attaining witness with r explicit signs.
    #[command(allow_negative_numbers = true)]
    Witness {
        #[arg(long, value_parser = parse_rep)]
        rep: DualRep,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        scale: IsolatedSpec,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OperatorName {
    Identity,
    Shift,
    Cesaro,
    /// Row map given by --row, an expression in x and t.
    Custom,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long, value_enum)]
    operator: OperatorName,
    /// Kernel expression for the custom operator.
    #[arg(long, value_parser = parse_expression)]
    row: Option<Expr>,
    #[command(flatten)]
    scale: IsolatedSpec,
    /// Number of basis indices materialized.
    #[arg(long, default_value_t = 32)]
    width: usize,
    /// Comma-separated x values to report; defaults to the first six points.
    #[arg(long, value_delimiter = ',')]
    xs: Option<Vec<f64>>,
    /// Kernel columns printed per row.
    #[arg(long, default_value_t = 8)]
    show: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum ScaleAction {
    /// Jump operators, graininess and point classes.
    #[command(allow_negative_numbers = true)]
    Info {
        #[arg(long, value_parser = parse_scale)]
        scale: ScaleArg,
        /// Comma-separated points to classify.
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
        /// With --to, print the decomposition of [from, to].
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
    },
    /// Evidence that f has a limit at infinity, and whether it is zero.
    #[command(allow_negative_numbers = true)]
    Probe {
        #[arg(long, value_parser = parse_scale)]
        scale: ScaleArg,
        #[arg(long, value_parser = parse_expression)]
        f: Expr,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long, default_value_t = 1e6)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Clone)]
struct ScaleArg {
    descriptor: ScaleDescriptor,
    scale: TimeScale,
}

fn parse_scale(s: &str) -> Result<ScaleArg, String> {
    let descriptor = ScaleDescriptor::parse(s).map_err(|e| e.to_string())?;
    let scale = descriptor.build().map_err(|e| e.to_string())?;
    Ok(ScaleArg { descriptor, scale })
}

fn parse_expression(s: &str) -> Result<Expr, String> {
    expr::parse(s).map_err(|e| e.to_string())
}

fn parse_rep(s: &str) -> Result<DualRep, String> {
    serde_json::from_str(s).map_err(|e| format!("bad DualRep: {e}"))
}

/// Result of a subcommand, rendered as JSON or text by [`run`].
struct Outcome {
    json: Value,
    text: String,
    /// False when some computation did not converge.
    converged: bool,
}

enum Failure {
    Config(String),
    NonConvergence(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NoLimit(_) => Failure::NonConvergence(msg),
            Error::NonFinite(_) | Error::NonMonotoneGenerator(_) | Error::Operator { .. } => {
                Failure::Numeric(msg)
            }
            _ => Failure::Config(msg),
        }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and writes
/// its report to `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let written = if cli.json {
                serde_json::to_string_pretty(&o.json)
                    .map(|s| writeln!(out, "{s}"))
                    .is_ok()
            } else {
                write!(out, "{}", o.text).is_ok()
            };
            if !written {
                return EXIT_FAILURE;
            }
            if o.converged {
                EXIT_OK
            } else {
                let _ = writeln!(err, "warning: a computation did not converge");
                if cli.strict {
                    EXIT_NONCONVERGENCE
                } else {
                    EXIT_OK
                }
            }
        }
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::NonConvergence(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            if cli.strict {
                EXIT_NONCONVERGENCE
            } else {
                EXIT_FAILURE
            }
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

const GLOBAL_FLAGS: [&str; 3] = ["--json", "--trace", "--strict"];
const NESTED: [&str; 2] = ["dual", "scale"];

/// Splices the `--config` file into the argument vector.
///
/// The file's `command` key (a string or array) supplies the subcommand when
/// none is given; every other key `k` becomes `--k=value`, inserted before the
/// command-line arguments so those override it.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)
        .map_err(|e| format!("config {} is not valid JSON: {e}", path.display()))?
    else {
        return Err(format!("config {} must be a JSON object", path.display()));
    };

    let mut it = argv.into_iter();
    let prog = it.next().unwrap_or_else(|| "tscale".into());
    let rest: Vec<String> = it.collect();
    let mut globals = Vec::new();
    let mut i = 0;
    while i < rest.len() && rest[i].starts_with('-') {
        globals.push(rest[i].clone());
        if rest[i] == "--config" && i + 1 < rest.len() {
            globals.push(rest[i + 1].clone());
            i += 1;
        }
        i += 1;
    }
    let mut tail: Vec<String> = rest[i..].to_vec();
    let mut path_tokens = Vec::new();
    if !tail.is_empty() {
        let n = if NESTED.contains(&tail[0].as_str()) && tail.len() > 1 && !tail[1].starts_with('-') {
            2
        } else {
            1
        };
        path_tokens = tail.drain(..n).collect();
    }

    let mut config_args = Vec::new();
    for (key, value) in &map {
        if key == "command" {
            if path_tokens.is_empty() {
                path_tokens = command_tokens(value)?;
            }
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match value {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                config_args.push(flag);
                continue;
            }
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Object(_) => value.to_string(),
        };
        config_args.push(format!("{flag}={rendered}"));
    }
    let (global_cfg, sub_cfg): (Vec<String>, Vec<String>) = config_args
        .into_iter()
        .partition(|a| GLOBAL_FLAGS.contains(&a.as_str()));

    let mut out = vec![prog];
    out.extend(global_cfg);
    out.extend(globals);
    out.extend(path_tokens);
    out.extend(sub_cfg);
    out.extend(tail);
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(Path::new(p).to_path_buf());
        }
    }
    None
}

fn command_tokens(v: &Value) -> Result<Vec<String>, String> {
    match v {
        Value::String(s) => Ok(s.split_whitespace().map(str::to_string).collect()),
        Value::Array(items) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or("command entries must be strings".to_string()))
            .collect(),
        _ => Err("command must be a string or an array of strings".into()),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Integrate(a) => integrate(a, cli.trace),
        Command::Improper(a) => improper(a, cli.trace),
        Command::Transform(a) => transform(a),
        Command::Regularity(a) => regularity(a, cli.trace),
        Command::Dual { action } => dual(action),
        Command::ExtractKernel(a) => extract(a),
        Command::Scale { action } => scale(action),
    }
}

fn integrand(e: &Expr, scale: &TimeScale, start: f64) -> Result<ScaleFunction, Error> {
    e.to_function(scale.clone(), start)
}

fn integrate(a: &IntegrateArgs, trace: bool) -> Result<Outcome, Failure> {
    let s = &a.scale.scale;
    let f = integrand(&a.f, s, s.min())?;
    let (r, segs) = DeltaIntegrator::default().integrate_traced(s, &f.as_fn(), a.a, a.b, a.tol)?;
    let mut json = json!({
        "scale": a.scale.descriptor,
        "f": a.f,
        "a": a.a,
        "b": a.b,
        "tol": a.tol,
        "result": r,
    });
    let mut text = format!(
        "integral of {} over [{}, {}] = {}\nerror estimate {:e}, converged {}, {} evaluations\n",
        a.f, a.a, a.b, r.value, r.abs_error_estimate, r.converged, r.evaluations
    );
    if trace {
        let mut points = vec![s.snap(a.a)?];
        let mut rows = Vec::new();
        for seg in &segs {
            points.extend(seg.partition_points());
            rows.push(json!({
                "segment": seg.segment,
                "cells": seg.cells,
                "value": seg.value,
                "error": seg.error,
            }));
            let _ = writeln!(text, "  {:?}: cells {}, value {}", seg.segment, seg.cells, seg.value);
        }
        json["trace"] = json!({ "segments": rows, "partition": points });
    }
    Ok(Outcome {
        json,
        text,
        converged: r.converged,
    })
}

fn improper(a: &ImproperArgs, trace: bool) -> Result<Outcome, Failure> {
    let s = &a.scale.scale;
    let f = integrand(&a.f, s, s.min())?;
    let (r, steps) = DeltaIntegrator::default().improper_traced(s, &f.as_fn(), a.a, a.tol)?;
    let mut json = json!({
        "scale": a.scale.descriptor,
        "f": a.f,
        "a": a.a,
        "tol": a.tol,
        "result": r,
    });
    let mut text = format!(
        "integral of {} over [{}, inf) = {}\nerror estimate {:e}, converged {}, truncated at {}, {} evaluations\n",
        a.f, a.a, r.value, r.abs_error_estimate, r.converged, r.truncation_point, r.evaluations
    );
    if trace {
        for st in &steps {
            let _ = writeln!(text, "  A = {}: partial {}, increment {:e}", st.target, st.partial, st.increment);
        }
        json["trace"] = json!({ "targets": steps });
    }
    Ok(Outcome {
        json,
        text,
        converged: r.converged,
    })
}

fn transform(a: &TransformArgs) -> Result<Outcome, Failure> {
    let k = a.kernel.build()?;
    let f = integrand(&a.f, k.t_scale(), k.beta())?;
    let xs = match &a.xs {
        Some(v) => v.clone(),
        None => XProbe { horizon: a.horizon }.points(k.x_scale(), k.alpha())?,
    };
    let mut converged = true;
    let mut rows = Vec::with_capacity(xs.len());
    let mut text = format!("{:>14}  {:>22}  {:>10}  converged\n", "x", "(Lf)(x)", "error");
    for x in xs {
        let r = k.apply(&f, x, a.tol)?;
        converged &= r.converged;
        let _ = writeln!(text, "{x:>14}  {:>22}  {:>10.2e}  {}", r.value, r.abs_error_estimate, r.converged);
        rows.push(json!({ "x": x, "value": r.value, "abs_error_estimate": r.abs_error_estimate, "converged": r.converged }));
    }
    let mut json = json!({ "kernel": a.kernel.kernel, "f": a.f, "tol": a.tol, "rows": rows });
    if a.limit {
        let cfg = LimitConfig {
            tol: a.tol,
            horizon: a.horizon,
            ..LimitConfig::default()
        };
        let d = limit_at_infinity(&k.transform(&f, a.tol / 10.0), &cfg)?;
        match d.limit() {
            Some(l) => {
                let _ = writeln!(text, "limit of Lf: {l} (window spread {:e})", d.oscillation);
            }
            None => {
                converged = false;
                let _ = writeln!(text, "limit of Lf: not established ({:?})", d.status);
            }
        }
        json["limit"] = serde_json::to_value(&d).unwrap_or(Value::Null);
    }
    Ok(Outcome {
        json,
        text,
        converged,
    })
}

fn regularity(a: &RegularityArgs, trace: bool) -> Result<Outcome, Failure> {
    let k = a.kernel.build()?;
    let cfg = RegularityConfig {
        probe: XProbe { horizon: a.horizon },
        y_count: a.y_count,
        tol: a.tol,
        ..RegularityConfig::default()
    };
    let report = regularity_report(&k, &cfg)?;
    let c = &report.conditions;
    let named = [("i", &c.i), ("ii", &c.ii), ("iii", &c.iii), ("iv", &c.iv)];
    let converged = named
        .iter()
        .all(|(_, c)| c.witnesses.iter().all(|w| w.value.is_finite()));
    let mut text = format!("M estimate: {}\n", report.m_estimate);
    for (name, cond) in named {
        let _ = writeln!(
            text,
            "condition ({name}): {} ({} witnesses)",
            if cond.passed { "pass" } else { "FAIL" },
            cond.witnesses.len()
        );
        if trace {
            for w in &cond.witnesses {
                match w.y {
                    Some(y) => writeln!(text, "    x = {}, t = {y}: {}", w.x, w.value),
                    None => writeln!(text, "    x = {}: {}", w.x, w.value),
                }
                .ok();
            }
        }
    }
    let verdict = serde_json::to_value(&report.verdict).unwrap_or(Value::Null);
    let _ = writeln!(text, "verdict: {}", verdict["kind"].as_str().unwrap_or("?"));
    if let RegularityVerdict::Fails { failed } = &report.verdict {
        let _ = writeln!(text, "failed: {}", failed.join(", "));
    }
    Ok(Outcome {
        json: serde_json::to_value(&report).unwrap_or(Value::Null),
        text,
        converged,
    })
}

fn dual(action: &DualAction) -> Result<Outcome, Failure> {
    match action {
        DualAction::Apply { rep, f, scale, tol } => {
            let iso = scale.build()?;
            let f = integrand(f, iso.scale(), iso.beta())?;
            let cfg = LimitConfig {
                tol: *tol,
                ..LimitConfig::default()
            };
            let est = apply_functional(rep, &f, &iso, &cfg)?;
            Ok(Outcome {
                text: format!("F(f) = {} (truncation bound {:e})\n", est.value, est.error_bound),
                json: json!({ "rep": rep, "value": est.value, "error_bound": est.error_bound }),
                converged: true,
            })
        }
        DualAction::Norm { rep } => {
            let norm = functional_norm(rep);
            let ell1 = to_ell1(rep).ok();
            Ok(Outcome {
                text: format!("||F|| = {norm}\n"),
                json: json!({ "rep": rep, "norm": norm, "ell1": ell1 }),
                converged: true,
            })
        }
        DualAction::Witness { rep, r, scale, tol } => {
            let iso = scale.build()?;
            let w = norm_witness(rep, &iso, *r)?;
            let cfg = LimitConfig {
                tol: *tol,
                ..LimitConfig::default()
            };
            let value = apply_functional(rep, &w, &iso, &cfg)?.value;
            let norm = functional_norm(rep);
            let pts = iso.points(r + 2)?;
            let values: Vec<[f64; 2]> = pts.iter().map(|&t| [t, w.eval(t)]).collect();
            let mut text = format!("F(witness) = {value}\n||F||      = {norm}\nwitness values:\n");
            for [t, v] in &values {
                let _ = writeln!(text, "  f({t}) = {v}");
            }
            let _ = writeln!(text, "  f(t) = {} beyond", w.eval(pts[pts.len() - 1]));
            Ok(Outcome {
                text,
                json: json!({ "rep": rep, "r": r, "value": value, "norm": norm, "witness": values }),
                converged: true,
            })
        }
    }
}

fn extract(a: &ExtractArgs) -> Result<Outcome, Failure> {
    let iso = a.scale.build()?;
    let op: Arc<dyn LinearOperator> = match a.operator {
        OperatorName::Custom => {
            let row = a
                .row
                .as_ref()
                .ok_or_else(|| Failure::Config("the custom operator needs --row".into()))?;
            let k = row.to_kernel(iso.scale().clone(), iso.beta(), iso.scale().clone(), iso.beta())?;
            Arc::new(KernelOperator {
                kernel: k,
                tol: a.tol,
                name: format!("custom {row}"),
            })
        }
        named => {
            let name = serde_json::to_value(named).unwrap_or(Value::Null);
            builtin_operator(name.as_str().unwrap_or(""), &iso)
                .ok_or_else(|| Failure::Config("unknown operator".into()))?
        }
    };
    let ex = extract_kernel(Arc::clone(&op), iso.scale().clone(), iso.beta(), &iso, a.width)?;
    let xs = match &a.xs {
        Some(v) => v.clone(),
        None => iso.points(a.width.min(6))?,
    };
    let show = a.show.min(a.width);
    let tks = iso.points(show)?;
    let mut converged = true;
    let mut rows = Vec::new();
    let mut text = format!("kernel of {} (width {})\n{:>10} |", op.name(), a.width, "x \\ t");
    for t in &tks {
        let _ = write!(text, " {t:>9}");
    }
    text.push('\n');
    for &x in &xs {
        let vals: Vec<f64> = tks.iter().map(|&t| ex.kernel.eval(x, t)).collect();
        converged &= vals.iter().all(|v| v.is_finite());
        let _ = write!(text, "{x:>10} |");
        for v in &vals {
            let _ = write!(text, " {:>9.4}", v);
        }
        text.push('\n');
        rows.push(json!({ "x": x, "values": vals }));
    }
    let tests = (1..=a.width.min(4))
        .map(|k| basis_element(&iso, k))
        .collect::<Result<Vec<_>, _>>()?;
    let report = verify_reconstruction(op.as_ref(), &ex.kernel, &tests, &xs, a.tol.max(1e-12))?;
    let _ = writeln!(
        text,
        "reconstruction on e_1..e_{}: {} (max |diff| {:e})",
        tests.len(),
        if report.pass { "pass" } else { "FAIL" },
        report.max_abs_diff
    );
    for r in &report.row_sums {
        let _ = writeln!(text, "  row sum at x = {}: {} (L1 = {})", r.x, r.row_integral, r.operator_on_one);
    }
    for w in &ex.warnings {
        let _ = writeln!(
            text,
            "warning: linearity check failed at x = {} (alpha {}): {} vs {}",
            w.x, w.alpha, w.combined, w.separate
        );
    }
    Ok(Outcome {
        json: json!({
            "operator": op.name(),
            "width": a.width,
            "t": tks,
            "rows": rows,
            "warnings": ex.warnings,
            "reconstruction": report,
        }),
        text,
        converged,
    })
}

fn scale(action: &ScaleAction) -> Result<Outcome, Failure> {
    match action {
        ScaleAction::Info { scale, at, from, to } => {
            let s = &scale.scale;
            let mut text = format!("minimum {}\n", s.min());
            let mut points = Vec::new();
            for &t in at {
                let p = s.snap(t)?;
                let (sigma, rho, mu) = (s.sigma(p)?, s.rho(p)?, s.graininess(p)?);
                let class = s.classify(p)?;
                let _ = writeln!(
                    text,
                    "t = {p}: sigma {sigma}, rho {rho}, mu {mu}, {}",
                    describe_class(&class)
                );
                points.push(json!({ "t": p, "sigma": sigma, "rho": rho, "mu": mu, "class": class }));
            }
            let mut json = json!({ "scale": scale.descriptor, "min": s.min(), "points": points });
            match (from, to) {
                (Some(a), Some(b)) => {
                    let segs = s.decompose(*a, *b)?;
                    for seg in &segs {
                        let _ = writeln!(text, "  {seg:?}");
                    }
                    json["segments"] = serde_json::to_value(&segs).unwrap_or(Value::Null);
                }
                (None, None) => {}
                _ => return Err(Failure::Config("--from and --to go together".into())),
            }
            Ok(Outcome {
                json,
                text,
                converged: true,
            })
        }
        ScaleAction::Probe {
            scale,
            f,
            start,
            horizon,
            tol,
        } => {
            let s = &scale.scale;
            let f = integrand(f, s, start.unwrap_or_else(|| s.min()))?;
            let cfg = MembershipConfig {
                limit: LimitConfig {
                    tol: *tol,
                    horizon: *horizon,
                    ..LimitConfig::default()
                },
                ..MembershipConfig::default()
            };
            let r = membership_report(&f, &cfg)?;
            let name = |v| serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string));
            let text = format!(
                "in C:  {}\nin C0: {}\nlimit: {:?}\nsup |f| >= {}\n",
                name(r.in_c).unwrap_or_default(),
                name(r.in_c0).unwrap_or_default(),
                r.evidence.limit.status,
                r.evidence.sup_norm_lower_bound
            );
            Ok(Outcome {
                json: serde_json::to_value(&r).unwrap_or(Value::Null),
                text,
                converged: r.evidence.limit.limit().is_some(),
            })
        }
    }
}

fn describe_class(c: &crate::scale::PointClass) -> &'static str {
    match (c.isolated(), c.dense()) {
        (true, _) => "isolated",
        (_, true) => "dense",
        _ if c.right_scattered() => "right-scattered, left-dense",
        _ => "right-dense, left-scattered",
    }
}
