use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str], input: Option<&Value>) -> (Output, Value) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kisinram"));
    cmd.args(args);
    if let Some(v) = input {
        let path = dir.path().join("input.json");
        fs::write(&path, v.to_string()).unwrap();
        cmd.arg("--input").arg(&path);
    }
    let out = cmd.output().unwrap();
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, doc)
}

fn rank_one(s: i64, e: i64) -> Value {
    json!({"p": 3, "e": e, "r": 1, "A": [[[[s, 1]]]]})
}

#[test]
fn rank_one_lower_breaks() {
    let (out, doc) = run(&["lower-breaks"], Some(&rank_one(1, 2)));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["jumps"], json!([[1, 2, 2]]));
    assert_eq!(doc["effective_config"]["command"], "lower-breaks");
}

#[test]
fn compare_mixed_worked_example() {
    let mut input = rank_one(3, 3);
    input["E"] = json!([-3, 0, 0, 1]);
    input["N"] = json!(2);
    let (out, doc) = run(&["compare-mixed"], Some(&input));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["mod_p_match"], true);
    assert_eq!(doc["breaks_equal"], true);
    // X^3 + π^3·(−1)·X: a = −1 ≡ 8 mod 9
    assert_eq!(doc["mixed_equations"]["equations"], json!([{"exponent": 3, "a": [[0, [8, 0, 0]]]}]));
}

#[test]
fn height_exceeded_is_a_mathematical_rejection() {
    let (out, doc) = run(&["eheight"], Some(&rank_one(3, 2)));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["code"], "height-exceeded");
}

#[test]
fn mixed_preconditions_are_reported() {
    let (out, doc) = run(&["compare-mixed"], Some(&rank_one(1, 2)));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["code"], "requires-p-divides-e");
}

#[test]
fn schema_errors_exit_one() {
    let mut input = rank_one(1, 2);
    input["colour"] = json!("blue");
    let (out, doc) = run(&["dual"], Some(&input));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(doc["code"], "schema");

    let (out, doc) = run(&["dual", "--input", "/nonexistent/module.json"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(doc["code"], "io");
}

#[test]
fn empty_corpus() {
    let (out, doc) = run(&["verify-main"], Some(&json!({"instances": []})));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(doc["code"], "empty-corpus");
}

#[test]
fn corrupted_dual_is_caught() {
    let good = json!({"name": "good", "module": rank_one(1, 2)});
    // the true dual of (u) is (−u); (u^2) pairs to zero
    let bad = json!({"name": "corrupted", "module": rank_one(1, 2), "dual": rank_one(2, 2)});
    let (out, doc) = run(&["verify-main"], Some(&json!({"instances": [good, bad]})));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["summary"]["failed"], json!(["corrupted"]));
    let report = &doc["reports"][1];
    assert_eq!(report["passed"], false);
    assert_eq!(report["duality"]["checks"]["gram_invertible"], "fail");
    assert_eq!(doc["reports"][0]["passed"], true);
}

#[test]
fn output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("glued.json");
    let module = json!({"p": 3, "e": 2, "A": [[[[1, 1]], [[0, 1]]], [[], [[1, 1]]]]});
    fs::write(&input, module.to_string()).unwrap();
    let once = || Command::new(env!("CARGO_BIN_EXE_kisinram")).arg("duality-report").arg("--input").arg(&input).output().unwrap();
    let (a, b) = (once(), once());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn emitted_modules_reparse() {
    let (out, doc) = run(&["basechange", "--factor", "3", "--pretty"], Some(&rank_one(1, 2)));
    assert_eq!(out.status.code(), Some(0));
    let module = doc["module"].clone();
    assert_eq!(module["e"], 6);
    let (out, again) = run(&["basechange", "--factor", "1"], Some(&module));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(again["module"], module);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let input = dir.path().join("in.json");
    fs::write(&input, rank_one(1, 2).to_string()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_kisinram"))
        .args(["upper-jumps", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&target)
        .status()
        .unwrap();
    assert!(status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(Path::new(&target)).unwrap()).unwrap();
    assert!(doc.get("effective_config").is_some());
}

#[test]
fn shipped_corpus_round_trips() {
    let (out, corpus) = run(&["verify-main", "--emit-corpus"], None);
    assert_eq!(out.status.code(), Some(0));
    let n = corpus["instances"].as_array().unwrap().len();
    assert!(n > 150);
    let first = json!({"instances": [corpus["instances"][0].clone()]});
    let (out, doc) = run(&["verify-main"], Some(&first));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["summary"]["passed"], 1);
}
