use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use igsd_cli::document::PatternDocument;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn igsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igsd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn discover_to(out: &Path, extra: &[&str]) {
    let fixture = data("fixture8.csv");
    let mut args = vec!["discover", "--data", &fixture, "--target", "T", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = igsd(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    assert_eq!(igsd(&["--help"]).status.code(), Some(0));
    assert_eq!(igsd(&[]).status.code(), Some(1));
    let fixture = data("fixture8.csv");
    let bad_mode = igsd(&["discover", "--data", &fixture, "--target", "T", "--t-mode", "foo"]);
    assert_eq!(bad_mode.status.code(), Some(1));
    assert_eq!(igsd(&["discover", "--data", "no-such.csv", "--target", "T"]).status.code(), Some(2));
    let missing = igsd(&["discover", "--data", &fixture, "--target", "nope"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("`nope` not found"));
}

#[test]
fn discover_document_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    discover_to(&path, &["--dmax", "3"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = PatternDocument::read(&path).unwrap();
    assert_eq!(doc.to_canonical_json(), text);
    assert!(!doc.patterns.is_empty());
}

#[test]
fn stdout_and_file_output_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    discover_to(&path, &[]);
    let o = igsd(&["discover", "--data", &data("fixture8.csv"), "--target", "T"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(&path).unwrap());
    assert!(stderr(&o).contains("patterns"));
}

#[test]
fn evaluate_reproduces_the_stored_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    discover_to(&path, &["--t-mode", "maximum"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let o = igsd(&["evaluate", "--data", &data("fixture8.csv"), "--patterns", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (stored, fresh) = (&doc["set_stats"]["overall"], &rows[0]["stats"]);
    for key in ["size", "length", "coverage", "wracc", "confidence", "accuracy", "info_gained", "odd_range", "p_value"] {
        let (a, b) = (stored[key].as_f64().unwrap(), fresh[key].as_f64().unwrap());
        assert!((a - b).abs() < 1e-9, "{key}: {a} vs {b}");
    }
}

#[test]
fn evaluate_compares_several_documents() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    discover_to(&a, &["--t-mode", "maximum"]);
    discover_to(&b, &["--t-mode", "dynamic", "--min-orr", "1"]);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let csv = igsd(&["evaluate", "--data", &data("fixture8.csv"), "--patterns", a, b]);
    let text = stdout(&csv);
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.starts_with("pattern_set,size,length,"));
    let md = stdout(&igsd(&["evaluate", "--data", &data("fixture8.csv"), "--patterns", a, b, "--format", "md"]));
    assert_eq!(md.lines().count(), 4);
}

#[test]
fn evaluate_rejects_a_foreign_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    discover_to(&path, &[]);
    let o = igsd(&["evaluate", "--data", &data("iris.csv"), "--patterns", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dmax_one_gives_single_selector_patterns() {
    let o = igsd(&["discover", "--data", &data("fixture8.csv"), "--target", "T", "--dmax", "1", "--min-orr", "1"]);
    let doc = PatternDocument::from_json(&stdout(&o)).unwrap();
    assert!(!doc.patterns.is_empty());
    assert!(doc.patterns.iter().all(|p| p.selectors.len() == 1));
    assert_eq!(doc.config.unwrap().dmax, 1);
}

#[test]
fn cond_list_and_association_are_honoured_and_echoed() {
    let o = igsd(&[
        "discover",
        "--data",
        &data("lucat-like.csv"),
        "--target",
        "progression",
        "--dmax",
        "3",
        "--cond",
        "stage,first_treatment",
        "--association",
        "positive",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = PatternDocument::from_json(&stdout(&o)).unwrap();
    for p in &doc.patterns {
        let attrs: Vec<&str> = p.selectors.iter().map(|s| s.attribute.as_str()).collect();
        assert!(attrs.contains(&"stage") && attrs.contains(&"first_treatment"), "{attrs:?}");
    }
    let config = doc.config.unwrap();
    assert_eq!(config.cond_list, ["stage", "first_treatment"]);
    assert_eq!(config.association, "positive");
}

#[test]
fn agreement_outputs() {
    let perfect = stdout(&igsd(&["agree", "--ratings", &data("ratings/perfect.csv")]));
    assert!(perfect.contains("AC1: 1.000000") && perfect.contains("ICC: 1.000000"), "{perfect}");
    let two = stdout(&igsd(&["agree", "--ratings", &data("ratings/two-raters.csv")]));
    assert!(two.contains("items: 100") && two.contains("AC1: 0.600000"), "{two}");
    let seven = stdout(&igsd(&["agree", "--ratings", &data("ratings/seven-raters.csv")]));
    assert!(seven.contains("raters: 7"), "{seven}");
}

#[test]
fn oracle_passes_and_detects_an_injected_cut_bug() {
    let fixture = data("fixture8.csv");
    let ok = igsd(&["oracle", "--data", &fixture, "--target", "T", "--dmax", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("PASS"));
    let bad = igsd(&["oracle", "--data", &fixture, "--target", "T", "--dmax", "3", "--inject-cut-bug"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("cut position differs"), "{}", stdout(&bad));
}

#[test]
fn oracle_refuses_oversized_enumeration() {
    let o = igsd(&["oracle", "--data", &data("tic-tac-toe.csv"), "--target", "class"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exhaustive enumeration refused"));
}
