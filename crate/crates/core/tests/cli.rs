//! End-to-end checks of the `tscale` command line.

use std::process::Command;

use serde_json::Value;
use tscale::cli::{run, EXIT_CONFIG, EXIT_FAILURE, EXIT_NONCONVERGENCE, EXIT_OK};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", self.stdout))
    }
}

fn tscale(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tscale").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

const CESARO: &str = "if(t<=x, 1/(x+1), 0)";

#[test]
fn integrates_on_the_integers() {
    let o = tscale(&["--json", "integrate", "--scale", "integers", "--f", "t", "--a", "0", "--b", "4"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["result"]["value"], 6.0);
    assert_eq!(v["result"]["converged"], true);
}

#[test]
fn integrates_on_the_hybrid_scale_with_trace() {
    let o = tscale(&["--json", "--trace", "integrate", "--scale", "hybrid", "--f", "t", "--a", "0", "--b", "3"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = o.json();
    assert!((v["result"]["value"].as_f64().unwrap() - 4.0).abs() < 1e-8);
    assert!(o.stdout.contains("partition"));
}

#[test]
fn text_output_is_a_table() {
    let o = tscale(&["integrate", "--scale", "reals", "--f", "t^2", "--a", "0", "--b", "1"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("0.333333"), "{}", o.stdout);
}

#[test]
fn reversed_bounds_are_a_config_error() {
    let o = tscale(&["integrate", "--scale", "reals", "--f", "t", "--a", "2", "--b", "1"]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("a must not exceed b"), "{}", o.stderr);
}

#[test]
fn malformed_expressions_report_the_offset() {
    let o = tscale(&["integrate", "--scale", "integers", "--f", "t**2", "--a", "0", "--b", "1"]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("offset 2"), "{}", o.stderr);
}

#[test]
fn unknown_flags_and_bad_scales_exit_with_config_code() {
    assert_eq!(tscale(&["integrate", "--bogus"]).code, EXIT_CONFIG);
    let o = tscale(&["integrate", "--scale", "{\"kind\":\"nope\"}", "--f", "t", "--a", "0", "--b", "1"]);
    assert_eq!(o.code, EXIT_CONFIG);
}

#[test]
fn operator_failures_are_numeric_errors() {
    let o = tscale(&["integrate", "--scale", "integers", "--f", "log(t)", "--a", "0", "--b", "2"]);
    assert_eq!(o.code, EXIT_FAILURE, "{}", o.stderr);
    assert!(o.stderr.contains("non-finite"), "{}", o.stderr);
}

#[test]
fn help_exits_cleanly() {
    let o = tscale(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("extract-kernel"));
}

#[test]
fn improper_integral_on_the_q_scale() {
    let scale = r#"{"kind":"geometric","start":1,"ratio":2}"#;
    let o = tscale(&["--json", "improper", "--scale", scale, "--f", "t^-2", "--a", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = o.json();
    assert!((v["result"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn divergent_improper_integral_needs_strict_for_code_3() {
    let args = ["improper", "--scale", "integers", "--f", "1", "--a", "0"];
    let lenient = tscale(&args);
    assert_eq!(lenient.code, EXIT_OK);
    assert!(lenient.stderr.contains("did not converge"), "{}", lenient.stderr);
    let mut strict = vec!["--strict"];
    strict.extend(args);
    assert_eq!(tscale(&strict).code, EXIT_NONCONVERGENCE);
}

#[test]
fn probe_of_an_oscillating_function() {
    let args = ["scale", "probe", "--scale", "integers", "--f", "cos(t)"];
    assert_eq!(tscale(&args).code, EXIT_OK);
    let mut strict = vec!["--strict"];
    strict.extend(args);
    assert_eq!(tscale(&strict).code, EXIT_NONCONVERGENCE);
}

#[test]
fn transform_recovers_the_limit() {
    let o = tscale(&["--json", "transform", "--kernel", CESARO, "--f", "3+1/(t+1)", "--xs", "0,1", "--limit"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["rows"][0]["value"], 4.0);
    assert_eq!(v["limit"]["status"]["status"], "converged");
    assert!((v["limit"]["status"]["value"].as_f64().unwrap() - 3.0).abs() < 1e-4);
}

#[test]
fn regularity_of_the_cesaro_kernel() {
    let o = tscale(&["--json", "regularity", "--kernel", CESARO]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = o.json();
    assert_eq!(v["verdict"]["kind"], "Evidence-Regular");
    for c in ["i", "ii", "iii", "iv"] {
        assert_eq!(v["conditions"][c]["passed"], true, "condition {c}");
    }
}

#[test]
fn dual_norm_and_witness() {
    let rep = r#"{"b":1,"coeffs":[2,-3]}"#;
    let norm = tscale(&["--json", "dual", "norm", "--rep", rep]).json();
    assert_eq!(norm["norm"], 6.0);
    assert_eq!(norm["ell1"], serde_json::json!([1.0, 2.0, -3.0]));
    let w = tscale(&["--json", "dual", "witness", "--rep", rep, "--r", "2"]).json();
    assert_eq!(w["value"], 6.0);
}

#[test]
fn dual_apply_evaluates_the_functional() {
    let rep = r#"{"b":2,"coeffs":[1]}"#;
    let o = tscale(&["--json", "dual", "apply", "--rep", rep, "--f", "1+1/(t+1)"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let value = o.json()["value"].as_f64().unwrap();
    assert!((value - 4.0).abs() < 1e-5, "{value}");
}

#[test]
fn dual_rejects_unknown_fields() {
    let o = tscale(&["dual", "norm", "--rep", r#"{"b":1,"c":[1]}"#]);
    assert_eq!(o.code, EXIT_CONFIG);
}

#[test]
fn extract_kernel_reconstructs_builtin_operators() {
    for op in ["identity", "shift", "cesaro"] {
        let o = tscale(&["--json", "extract-kernel", "--operator", op]);
        assert_eq!(o.code, EXIT_OK, "{op}: {}", o.stderr);
        assert_eq!(o.json()["reconstruction"]["pass"], true, "{op}");
    }
}

#[test]
fn extract_kernel_from_a_custom_row() {
    let o = tscale(&["--json", "extract-kernel", "--operator", "custom", "--row", "if(t<=x, 1/(x+1), 0)"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.json()["reconstruction"]["pass"], true);
}

#[test]
fn scale_info_classifies_points() {
    let v = tscale(&["--json", "scale", "info", "--scale", "hybrid", "--at", "0.5,1"]).json();
    assert_eq!(v["points"][1]["sigma"], 2.0);
    assert_eq!(v["points"][1]["class"]["right"], "scattered");
    assert_eq!(v["points"][0]["mu"], 0.0);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["--json", "regularity", "--kernel", CESARO];
    assert_eq!(tscale(&args).stdout, tscale(&args).stdout);
    let args = ["--json", "extract-kernel", "--operator", "cesaro"];
    assert_eq!(tscale(&args).stdout, tscale(&args).stdout);
}

fn write_config(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tscale-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn config_file_supplies_flags() {
    let path = write_config(
        "integrate.json",
        r#"{"command":"integrate","scale":"integers","f":"t","a":0,"b":4,"json":true}"#,
    );
    let o = tscale(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.json()["result"]["value"], 6.0);
}

#[test]
fn command_line_overrides_config_file() {
    let path = write_config("override.json", r#"{"scale":"integers","f":"t","a":0,"b":4}"#);
    let o = tscale(&["--json", "--config", path.to_str().unwrap(), "integrate", "--b", "5"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.json()["result"]["value"], 10.0);
}

#[test]
fn unreadable_config_is_a_config_error() {
    assert_eq!(tscale(&["--config", "/nonexistent/tscale.json", "integrate"]).code, EXIT_CONFIG);
    let path = write_config("broken.json", "{not json");
    assert_eq!(tscale(&["--config", path.to_str().unwrap(), "integrate"]).code, EXIT_CONFIG);
}

#[test]
fn binary_propagates_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tscale");
    let ok = Command::new(bin)
        .args(["integrate", "--scale", "integers", "--f", "t", "--a", "0", "--b", "4"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin)
        .args(["integrate", "--scale", "reals", "--f", "t", "--a", "3", "--b", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("a must not exceed b"));
}
