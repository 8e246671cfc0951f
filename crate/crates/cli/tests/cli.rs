use std::fs;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn pbx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn eqho_gram_and_riesz_report() {
    let out = pbx(&[
        "eqho",
        "--beta",
        "2.0",
        "--dim",
        "128",
        "--nmax",
        "16",
        "--suites",
        "gram,riesz",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let diag = v["suites"]["gram"]["labels"]["expected_diag"]["re"]
        .as_f64()
        .unwrap();
    assert!((diag - 0.6065307).abs() < 1e-7);
    assert_eq!(v["suites"]["riesz"]["labels"]["verdict"], "not_riesz");
    assert_eq!(v["summary"]["exit_code"], 0);
    let keys: Vec<&String> = v["suites"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["gram", "riesz"]);
}

#[test]
fn theta_outside_range_is_usage_error() {
    let out = pbx(&["swanson", "--theta", "0.9"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&pbx(&["--help"])), 0);
    assert_eq!(code(&pbx(&["--version"])), 0);
}

#[test]
fn empty_suite_list_gives_config_echo() {
    let out = pbx(&[
        "swanson",
        "--theta",
        "0.3",
        "--suites",
        "",
        "--no-timestamp",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["suites"], serde_json::json!({}));
    assert_eq!(v["config"]["model"], "swanson");
    assert!(v["provenance"]["timestamp"].is_null());
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "eqho",
        "--beta",
        "1.5",
        "--dim",
        "64",
        "--nmax",
        "8",
        "--suites",
        "commutators,basis",
        "--no-timestamp",
    ];
    let a = pbx(&args);
    let b = pbx(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let stamped = json(&pbx(&args[..args.len() - 1]));
    assert!(stamped["provenance"]["timestamp"].is_string());
    assert_eq!(
        stamped["provenance"]["content_sha256"],
        json(&a)["provenance"]["content_sha256"]
    );
}

#[test]
fn json_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = pbx(&[
        "eqho",
        "--beta",
        "2",
        "--dim",
        "32",
        "--nmax",
        "6",
        "--suites",
        "commutators",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["dim"], 32);
}

#[test]
fn csv_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbx(&[
        "eqho",
        "--beta",
        "2",
        "--dim",
        "128",
        "--nmax",
        "16",
        "--suites",
        "gram",
        "--format",
        "csv",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let gram = fs::read_to_string(dir.path().join("gram.csv")).unwrap();
    assert_eq!(gram.lines().next().unwrap(), "n,m,gram_re,gram_im");
    assert!(!gram.contains('\r'));
    let checks = fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(checks.starts_with("suite,name,value,threshold,pass\n"));
}

#[test]
fn csv_without_output_is_usage_error() {
    assert_eq!(code(&pbx(&["eqho", "--beta", "2", "--format", "csv"])), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let target = file.path().join("report.json");
    let out = pbx(&[
        "eqho",
        "--beta",
        "2",
        "--dim",
        "32",
        "--nmax",
        "4",
        "--suites",
        "",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn missing_vacuum_is_numerical_failure() {
    let out = pbx(&[
        "generalized",
        "--alpha",
        "0.7",
        "--beta-g",
        "0.7",
        "--dim",
        "64",
        "--nmax",
        "8",
        "--suites",
        "basis",
    ]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["suites"]["basis"]["error"]["kind"], "NoVacuum");
    assert_eq!(v["suites"]["basis"]["error"]["numerical"], true);
}

#[test]
fn failing_check_exits_one_with_report() {
    let out = pbx(&[
        "swanson",
        "--theta",
        "0.5235988",
        "--dim",
        "128",
        "--nmax",
        "16",
        "--suites",
        "gram",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["summary"]["passed"], false);
    assert!(!v["summary"]["failed_checks"].as_array().unwrap().is_empty());
}

fn malformed() -> impl Strategy<Value = Vec<String>> {
    let model = prop_oneof![
        Just(vec!["eqho", "--beta", "2"]),
        Just(vec!["swanson", "--theta", "0.3"]),
        Just(vec!["generalized", "--alpha", "0.1", "--beta-g", "0.2"]),
    ];
    let bad = prop_oneof![
        Just(vec!["--dim", "abc"]),
        Just(vec!["--dim", "4"]),
        Just(vec!["--dim", "-3"]),
        Just(vec!["--nmax", "200"]),
        Just(vec!["--nmax", "x"]),
        Just(vec!["--tol", "0"]),
        Just(vec!["--tol", "1"]),
        Just(vec!["--tol", "nan"]),
        Just(vec!["--suites", "gram,bogus"]),
        Just(vec!["--format", "xml"]),
        Just(vec!["--window", "1000"]),
        Just(vec!["--bogus"]),
        Just(vec!["--dim"]),
    ];
    let good = prop_oneof![
        Just(vec!["--dim", "64"]),
        Just(vec!["--nmax", "8"]),
        Just(vec!["--suites", "commutators"]),
        Just(vec!["--no-timestamp"]),
        Just(vec![]),
    ];
    (model, bad, good, any::<bool>()).prop_map(|(m, b, g, bad_first)| {
        let mut args: Vec<String> = m.iter().map(|s| s.to_string()).collect();
        let (first, second) = if bad_first { (b, g) } else { (g, b) };
        args.extend(first.iter().map(|s| s.to_string()));
        args.extend(second.iter().map(|s| s.to_string()));
        args
    })
}

fn bad_model() -> impl Strategy<Value = Vec<String>> {
    prop_oneof![
        Just(vec!["eqho", "--beta", "0"]),
        Just(vec!["eqho", "--beta", "-inf"]),
        Just(vec!["eqho"]),
        Just(vec!["swanson", "--theta", "0"]),
        Just(vec!["swanson", "--theta", "0.7854"]),
        Just(vec!["swanson", "--theta", "-1"]),
        Just(vec!["generalized", "--alpha", "0.1", "--beta-g", "-0.2"]),
        Just(vec!["generalized", "--alpha", "1", "--beta-g", "1"]),
        Just(vec!["oscillator", "--beta", "2"]),
        Just(vec![]),
    ]
    .prop_map(|v| v.iter().map(|s| s.to_string()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_flags_exit_two(args in malformed()) {
        let out = Command::new(env!("CARGO_BIN_EXE_pbx")).args(&args).output().unwrap();
        prop_assert_eq!(out.status.code(), Some(2), "{:?}", args);
        prop_assert!(out.stdout.is_empty());
    }

    #[test]
    fn invalid_model_parameters_exit_two(args in bad_model()) {
        let out = Command::new(env!("CARGO_BIN_EXE_pbx")).args(&args).output().unwrap();
        prop_assert_eq!(out.status.code(), Some(2), "{:?}", args);
    }
}
