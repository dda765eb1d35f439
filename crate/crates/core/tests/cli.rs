mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{corpus_dir, rules_path};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_label-bracket"))
        .args(args)
        .env_remove("LABEL_BRACKET_BUDGET")
        .env_remove("LABEL_BRACKET_DEPTH")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn corpus(name: &str) -> String {
    corpus_dir()
        .join(format!("{name}.pd"))
        .to_string_lossy()
        .into_owned()
}

fn rules(name: &str) -> String {
    rules_path(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--diagram", &corpus("theta")]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let mixed = write(dir.path(), "mixed.pd", "V+[1>,2<,3>]\nV-[3,2,1]\n");
    let o = run(&["validate", "--diagram", &mixed]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("mixed orientation"), "{}", stdout(&o));
    let o = run(&["validate", "--diagram", "/nonexistent/file.pd"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write(dir.path(), "bad.pd", "X[1,2,3]\n");
    assert_eq!(run(&["validate", "--diagram", &bad]).status.code(), Some(2));
    let o = run(&["validate", "--rules", &rules("label-bracket")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("incomplete: RS.1"));
}

#[test]
fn bracket_text_and_json() {
    let o = run(&[
        "bracket",
        "--diagram",
        &corpus("unknot"),
        "--rules",
        &rules("kauffman"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(-A^2 - A^-2) * [empty]\n");
    let o = run(&[
        "bracket",
        "--json",
        "--diagram",
        &corpus("trefoil"),
        "--rules",
        &rules("kauffman"),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ruleset"], "kauffman");
    assert_eq!(v["states"], 8);
    assert_eq!(v["fixpoint"], true);
    assert_eq!(v["terms"][0]["coefficient"], "A^7 + A^3 + A^-1 - A^-9");
    assert_eq!(v["terms"][0]["canonical_key"], "empty");
}

#[test]
fn bracket_with_skeleton_rules_reports_incomplete() {
    let o = run(&[
        "bracket",
        "--diagram",
        &corpus("theta"),
        "--rules",
        &rules("label-bracket"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("ruleset incomplete: RS.1"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn equiv_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let k = rules("kauffman");
    let a = write(dir.path(), "a.sum", "(A^5 + A) * [empty]\n");
    let o = run(&["equiv", &a, &a, "--rules", &k]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("equal (0 steps)"));
    // a loop and its value are one rule step apart
    let loop_ = write(dir.path(), "loop.sum", "1 * [O[u]]\n");
    let value = write(dir.path(), "value.sum", "(-A^2 - A^-2) * [empty]\n");
    let o = run(&["equiv", &loop_, &value, "--rules", &k]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("equal (1 steps)"), "{}", stdout(&o));
    // a kink changes the bracket by a unit
    let o = run(&[
        "equiv",
        &corpus("unknot"),
        &corpus("kink-left"),
        "--rules",
        &k,
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&[
        "equiv",
        "--json",
        &corpus("unknot"),
        &corpus("unknot"),
        "--rules",
        &k,
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "equal");
    // unknown ring variable
    let b = write(dir.path(), "b.sum", "q * [empty]\n");
    assert_ne!(
        run(&["equiv", &a, &b, "--rules", &k]).status.code(),
        Some(0)
    );
}

#[test]
fn certify_outcomes() {
    let k = rules("kauffman");
    let o = run(&[
        "certify",
        "--diagram",
        &corpus("trefoil"),
        "--rules",
        &k,
        "--move",
        "Ω2",
        "--site",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("certified"));
    let o = run(&[
        "certify",
        "--diagram",
        &corpus("trefoil"),
        "--rules",
        &k,
        "--move",
        "Ω1",
        "--site",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("unit factor -A^"), "{}", stdout(&o));
    let o = run(&[
        "certify",
        "--diagram",
        &corpus("hopf"),
        "--rules",
        &k,
        "--move",
        "Ω5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no sites"));
    let o = run(&[
        "certify",
        "--diagram",
        &corpus("hopf"),
        "--rules",
        &k,
        "--move",
        "Ω2",
        "--site",
        "9999",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "certify",
        "--diagram",
        &corpus("theta"),
        "--rules",
        &rules("label-bracket"),
        "--move",
        "Ω4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ruleset incomplete: RS.1"));
}

#[test]
fn sweep_reports() {
    let dir = tempfile::tempdir().unwrap();
    let k = rules("kauffman");
    let out = dir
        .path()
        .join("report.json")
        .to_string_lossy()
        .into_owned();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = run(&[
        "sweep",
        "--corpus",
        &empty.to_string_lossy(),
        "--rules",
        &k,
        "--moves",
        "Ω1..Ω5",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);

    let c = corpus_dir().to_string_lossy().into_owned();
    let o = run(&[
        "sweep", "--corpus", &c, "--rules", &k, "--moves", "Ω2,Ω3", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for key in [
        "diagram",
        "move",
        "direction",
        "site",
        "variant",
        "outcome",
        "factor",
        "trace_length",
        "error",
        "wall_ms",
    ] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
    let o = run(&[
        "sweep", "--corpus", &c, "--rules", &k, "--moves", "Ω1", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&[
        "sweep",
        "--corpus",
        &c,
        "--rules",
        &rules("label-bracket"),
        "--moves",
        "Ω1..Ω5",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ruleset incomplete: RS.1"));
}

#[test]
fn budget_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_label-bracket"))
        .args([
            "bracket",
            "--diagram",
            &corpus("unknot"),
            "--rules",
            &rules("kauffman"),
        ])
        .env("LABEL_BRACKET_BUDGET", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 * [O[u]]\n# normalization budget exhausted\n");
}

#[test]
fn json_is_stable_across_worker_counts() {
    let k = rules("kauffman");
    for f in ["trefoil", "figure-eight", "trefoil-theta", "handcuff"] {
        let one = run(&[
            "bracket",
            "--json",
            "--workers",
            "1",
            "--diagram",
            &corpus(f),
            "--rules",
            &k,
        ]);
        let many = run(&[
            "bracket",
            "--json",
            "--workers",
            "8",
            "--diagram",
            &corpus(f),
            "--rules",
            &k,
        ]);
        assert_eq!(one.stdout, many.stdout, "{f}");
    }
}
