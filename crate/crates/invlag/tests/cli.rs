//! The command-line front end: exit codes, report contents, the JSON schema
//! and agreement between human and JSON output.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use invlag::cli::{run, EXIT_EXHAUSTED, EXIT_FAIL, EXIT_NONE, EXIT_PASS, EXIT_USAGE};
use serde_json::Value;

struct Run {
    exit: i32,
    out: String,
    err: String,
}

fn invoke(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("invlag").chain(args.iter().copied());
    let exit = run(argv, &mut out, &mut err);
    Run { exit, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn example(name: &str) -> String {
    common::example_path(name).display().to_string()
}

/// Writes a scratch problem file under the test target directory.
fn scratch(name: &str, body: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

/// Runs with `--format json`, checks the document against the schema and
/// that its exit code matches the process exit.
fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let r = invoke(&full);
    let doc: Value = serde_json::from_str(&r.out).unwrap_or_else(|e| panic!("{e}: {}", r.out));
    let errors: Vec<String> = validator().iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}");
    assert_eq!(doc["exit_code"], r.exit);
    (r.exit, doc)
}

fn cell<'a>(doc: &'a Value, label: &str) -> &'a Value {
    doc["report"]["cells"].as_array().unwrap().iter().find(|c| c["label"] == label).unwrap_or_else(|| panic!("{label}"))
}

#[test]
fn analyze_prints_the_geometry() {
    let (exit, doc) = json(&["analyze", &example("ex1")]);
    assert_eq!(exit, EXIT_PASS);
    assert_eq!(doc["connection"][0][0], "1/2*omega");
    assert_eq!(doc["connection"][1][1], "-1/2*omega");
    assert_eq!(doc["jacobi"][0][0], "a - 1/4*omega^2");
    assert_eq!(doc["jacobi"][0][1], "b");
    assert_eq!(doc["jacobi"][1][0], "-b");

    let (_, free) = json(&["analyze", &example("free")]);
    for key in ["connection", "jacobi", "curvature", "theta"] {
        assert!(free[key].to_string().chars().all(|c| !c.is_alphanumeric() || c == '0'), "{key}");
    }
    let text = invoke(&["analyze", &example("ex2")]).out;
    assert!(text.contains("1/2*v3^2/q2"), "{text}");
}

#[test]
fn check_verdicts_and_exit_codes() {
    let ex1 = example("ex1");
    assert_eq!(json(&["check", &ex1, "--suite", "dissipative", "--candidate", "g2"]).0, EXIT_PASS);
    let (exit, doc) = json(&["check", &ex1, "--suite", "classical", "--candidate", "g3"]);
    assert_eq!(exit, EXIT_FAIL);
    assert_eq!(cell(&doc, "PhiSym[1,2]")["pass"], false);
    let (exit, doc) = json(&["check", &example("ex3"), "--suite", "thm3"]);
    assert_eq!(exit, EXIT_FAIL);
    let failing: Vec<&str> = doc["report"]["cells"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["label"].as_str().unwrap())
        .collect();
    assert!(failing.iter().any(|l| l.starts_with("Rcond")), "{failing:?}");
    assert_eq!(json(&["check", &example("implicit")]).0, EXIT_PASS);
}

#[test]
fn solve_exit_codes() {
    let (exit, doc) = json(&["solve", &example("ex2")]);
    assert_eq!(exit, EXIT_PASS);
    assert_eq!(doc["dimension"], 1);
    assert_eq!(doc["representative"]["det"], "8*q2");
    assert_eq!(doc["representative"]["g"][2][2], "2*q2");

    let (exit, doc) = json(&["solve", &example("ex3")]);
    assert_eq!(exit, EXIT_NONE);
    for entry in ["g[1,3]", "g[2,3]", "g[3,3]", "g[3,4]"] {
        assert!(doc["forced_zero"].as_array().unwrap().iter().any(|e| e == entry), "{entry}");
    }

    let empty = scratch("empty.json", r#"{"n": 2, "f": ["0", "0"], "ansatz": {"suite": "classical"}}"#);
    assert_eq!(json(&["solve", &empty]).0, EXIT_NONE);

    let (exit, doc) = json(&["solve", &example("ex2"), "--bound", "0"]);
    assert_eq!(exit, EXIT_EXHAUSTED);
    assert_eq!(doc["search"]["capped"], false);

    let (exit, _) = json(&["solve", &example("ex3"), "--suite", "thm4", "--instantiate", "b=1/2"]);
    assert_eq!(exit, EXIT_NONE);
}

#[test]
fn reconstruct_and_verify() {
    let (exit, doc) = json(&["reconstruct", &example("ex2")]);
    assert_eq!(exit, EXIT_PASS);
    assert_eq!(doc["certificate"]["D"], "2*q2*v1^2*v3");
    assert_eq!(doc["certificate"]["L"], "q2*v3^2 + 2*v1^2 + 1/2*v2^2");

    let (exit, doc) = json(&["reconstruct", &example("ex1"), "--suite", "gyroscopic"]);
    assert_eq!(exit, EXIT_PASS);
    assert_eq!(doc["certificate"]["omega"][0][1], "omega");

    let (_, doc) = json(&["reconstruct", &example("free")]);
    assert_eq!(doc["certificate"]["L"], "1/2*v1^2 + 1/2*v2^2");
    assert_eq!(doc["certificate"]["D"], "0");

    let ex1 = example("ex1");
    assert_eq!(json(&["verify", &ex1]).0, EXIT_PASS);
    assert_eq!(json(&["verify", &ex1, "--candidate", "g3"]).0, EXIT_PASS);
    assert_eq!(json(&["verify", &ex1, "--candidate", "gyro-negated"]).0, EXIT_FAIL);
    assert_eq!(json(&["verify", &ex1, "--forward"]).0, EXIT_PASS);
}

#[test]
fn certificate_file_round_trips() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ex2-certificate.json");
    let out_s = out.display().to_string();
    let r = invoke(&["reconstruct", &example("ex2"), "--out", &out_s]);
    assert_eq!(r.exit, EXIT_PASS, "{}", r.err);
    let (exit, doc) = json(&["verify", &out_s, "--forward"]);
    assert_eq!(exit, EXIT_PASS);
    assert_eq!(cell(&doc, "Forward[3]")["pass"], true);
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(invoke(&["frobnicate", &example("ex1")]).exit, EXIT_USAGE);
    assert_eq!(invoke(&["check"]).exit, EXIT_USAGE);
    let (exit, doc) = json(&["analyze", "/nonexistent/problem.json"]);
    assert_eq!(exit, EXIT_USAGE);
    assert_eq!(doc["status"], "error");

    let bad = scratch("bad-expr.json", "{\n  \"n\": 2,\n  \"f\": [\"q1 +\", \"0\"]\n}\n");
    let r = invoke(&["analyze", &bad]);
    assert_eq!(r.exit, EXIT_USAGE);
    assert!(r.err.contains(":3"), "{}", r.err);

    let unknown = scratch("unknown-field.json", r#"{"n": 2, "f": ["0", "0"], "dimension": 2}"#);
    assert_eq!(invoke(&["analyze", &unknown]).exit, EXIT_USAGE);
    let asym = scratch("asym.json", r#"{"n": 2, "f": ["0", "0"], "g": [["1", "1"], ["0", "1"]]}"#);
    assert_eq!(invoke(&["check", &asym, "--suite", "classical"]).exit, EXIT_USAGE);
    let implicit = example("implicit");
    assert_eq!(invoke(&["analyze", &implicit]).exit, EXIT_USAGE);
    assert_eq!(invoke(&["check", &example("ex1"), "--suite", "gyroscopic", "--candidate", "g1"]).exit, EXIT_USAGE);
}

#[test]
fn human_and_json_reports_agree() {
    let ex1 = example("ex1");
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", &ex1, "--suite", "classical", "--candidate", "g3"],
        vec!["check", &ex1, "--suite", "thm4", "--candidate", "g1"],
        vec!["verify", &ex1, "--candidate", "gyro-negated"],
    ];
    for args in cases {
        let text = invoke(&args);
        let (exit, doc) = json(&args);
        assert_eq!(text.exit, exit);
        for c in doc["report"]["cells"].as_array().unwrap() {
            let mark = if c["pass"] == true { "pass" } else { "FAIL" };
            let line = format!("  {mark}  {}:", c["label"].as_str().unwrap());
            assert!(text.out.contains(&line), "{args:?}: {line}");
        }
    }
}

#[test]
fn binary_honours_the_seed() {
    let exe = env!("CARGO_BIN_EXE_invlag");
    let run = |seed: &str| {
        Command::new(exe)
            .args(["verify", &example("ex1"), "--format", "json"])
            .env("INVLAG_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b) = (run("7"), run("7"));
    assert_eq!(a.status.code(), Some(EXIT_PASS));
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(exe).args(["solve", &example("ex3")]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_NONE));
}

#[test]
fn schema_rejects_malformed_reports() {
    let (_, good) = json(&["check", &example("ex1"), "--suite", "thm3"]);
    let mut wrong_exit = good.clone();
    wrong_exit["exit_code"] = 1.into();
    let mut stray = good.clone();
    stray["verdict"] = "ok".into();
    let mut no_report = good.clone();
    no_report.as_object_mut().unwrap().remove("report");
    let mut bad_cell = good;
    bad_cell["report"]["cells"][0]["expect"] = "maybe".into();
    for doc in [wrong_exit, stray, no_report, bad_cell] {
        assert!(!validator().is_valid(&doc), "{doc}");
    }
}
