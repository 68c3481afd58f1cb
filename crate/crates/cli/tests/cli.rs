use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdiv")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SPLIT_BUNDLE: &str = r#"[[{"1":[1]},0],[0,{"-1":[1]}]]"#;

#[test]
fn split_reads_bundle_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "b.json", SPLIT_BUNDLE);
    let out = fdiv(&["p1", "split", "--bundle", &path, "--seed", "7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema"], "fdiv/1");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["splitting"], serde_json::json!([1, -1]));
    assert_eq!(v["splitting"], v["h0_oracle"]);
}

#[test]
fn at_prefixed_path_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "b.json", SPLIT_BUNDLE);
    let out = fdiv(&["p1", "split", "--bundle", &format!("@{path}")]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn tower_lim_of_truncated_tower() {
    let t = r#"{"kind":"truncated","levels":[2,2],"maps":[{"matrix":[[1,0],[0,0]],"twist":1}]}"#;
    let out = fdiv(&["tower", "lim", "--tower", t]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["dim"], 1);
    assert_eq!(v["exact"], false);
}

#[test]
fn cohomology_of_line_bundle() {
    let out = fdiv(&["p1", "cohomology", "--bundle", r#"[[{"-3":[1]}]]"#, "--i", "1", "--twist", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    // h^1(O(-3)) = 2
    assert_eq!(json(&out)["dim"], 2);
}

#[test]
fn missing_file_exits_two_with_path() {
    let out = fdiv(&["p1", "split", "--bundle", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/definitely/not/here.json"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", "{\n  \"a\": [1, 2,\n}");
    let out = fdiv(&["p1", "split", "--bundle", &path]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains(&path) && msg.contains("line 3"), "{msg}");
}

#[test]
fn invalid_transition_matrix_is_a_usage_error() {
    let out = fdiv(&["p1", "split", "--bundle", r#"[[1,0],[0,{"0":[1],"1":[1]}]]"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_two() {
    assert_eq!(fdiv(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero_and_lists_commands() {
    let out = fdiv(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["diffop", "dmod", "p1", "tower", "spectral", "dcoh", "verify-paper"] {
        assert!(text.contains(cmd), "help lacks {cmd}");
    }
}

#[test]
fn only_runs_a_single_check() {
    let out = fdiv(&["verify-paper", "--only", "lucas-binomials"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "lucas-binomials");
}

#[test]
fn unknown_check_name_exits_two() {
    assert_eq!(fdiv(&["verify-paper", "--only", "no-such-check"]).status.code(), Some(2));
}

#[test]
fn injected_fault_fails_the_suite() {
    let out = fdiv(&["verify-paper", "--only", "operator-algebra", "--inject-fault", "corrupt-relation-table"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("operator-algebra"));
}

#[test]
fn table_output_has_one_row_per_check() {
    let out = fdiv(&["verify-paper", "--seed", "3", "--table"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}

#[test]
fn pullback_output_feeds_back_into_split() {
    let out = fdiv(&["--field", r#"{"p":3}"#, "p1", "pullback", "--bundle", SPLIT_BUNDLE]);
    assert!(out.status.success(), "{}", stderr(&out));
    let pulled = json(&out)["bundle"].to_string();
    let out = fdiv(&["--field", r#"{"p":3}"#, "p1", "split", "--bundle", &pulled]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["splitting"], serde_json::json!([3, -3]));
}

#[test]
fn from_tower_module_roundtrips_through_validate() {
    let out = fdiv(&["dmod", "from-tower", "--tower", r#"[[[1,{"1":1}],[0,1]]]"#]);
    assert!(out.status.success(), "{}", stderr(&out));
    let module = String::from_utf8(out.stdout).unwrap();
    let out = fdiv(&["dmod", "validate", "--module", &module]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn simulate_is_seed_deterministic() {
    let a = fdiv(&["spectral", "simulate", "--seed", "11"]);
    let b = fdiv(&["spectral", "simulate", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn witness_counts_monomials_off_the_subring() {
    let out = fdiv(&["dmod", "witness", "--p", "3", "--degree", "9"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["witness"], 6);
}
