use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use logsynth::cli;
use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        std::iter::once("logsynth").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TOY_MODEL: &str = r#"{
  "states": ["s0", "s1", "s2"],
  "initial": "s0",
  "accepting": ["s2"],
  "alphabet": ["x", "y", "z"],
  "transitions": [
    {"src": "s0", "symbol": "x", "dst": "s1"},
    {"src": "s1", "symbol": "y", "dst": "s2"},
    {"src": "s1", "symbol": "z", "dst": "s2"}
  ],
  "templates": {"x": "open session *", "y": "close session *", "z": "expire session *"}
}"#;

fn toy_pattern(dir: &Path, expr: &str, kind: &str) -> (PathBuf, PathBuf) {
    let model = dir.join("toy.json");
    fs::write(&model, TOY_MODEL).unwrap();
    let patterns = dir.join("toy.patterns.json");
    let doc = serde_json::json!({"id": "P1", "model": "toy", "type": kind, "expr": expr});
    fs::write(&patterns, doc.to_string()).unwrap();
    (model, patterns)
}

fn generate_example(out: &Path, seed: &str, extra: &[&str]) -> Run {
    let model = fixture("example.json");
    let patterns = fixture("example.patterns.json");
    let mut args = vec![
        "--seed",
        seed,
        "generate",
        "--model",
        &model,
        "--patterns",
        &patterns,
        "--size",
        "1000",
        "--mlsl",
        "100",
        "--failure-pct",
        "20",
        "--type",
        "F",
        "--out",
        path(out),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn model_validate_reports_the_example() {
    let r = run(&["model-validate", &fixture("example.json")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.lines().next(), Some("states=4 transitions=12 sValue(q0)=2"));
}

#[test]
fn model_validate_rejects_nondeterminism_with_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.json");
    fs::write(
        &model,
        TOY_MODEL.replace(
            r#"{"src": "s1", "symbol": "z", "dst": "s2"}"#,
            r#"{"src": "s1", "symbol": "y", "dst": "s0"}"#,
        ),
    )
    .unwrap();
    let r = run(&["model-validate", path(&model)]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("transitions[2]"), "{}", r.err);
    assert!(r.err.contains("non-deterministic"), "{}", r.err);
}

#[test]
fn model_validate_warns_about_isolated_states() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("iso.json");
    fs::write(&model, TOY_MODEL.replace(r#""s2"],"#, r#""s2", "s9"],"#)).unwrap();
    let r = run(&["model-validate", path(&model)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.err.contains("warning: isolated states: s9"), "{}", r.err);
}

#[test]
fn pattern_check_accepts_a_contained_finite_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let (model, patterns) = toy_pattern(dir.path(), "x (y | z)", "F");
    let r = run(&["pattern-check", path(&patterns), "--model", path(&model)]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert_eq!(
        r.out.trim(),
        "P1 ok type=F length=4 alphabet=3 operators=1 star_depth=0 proper=no"
    );
}

#[test]
fn pattern_check_prints_the_witness_of_a_failed_inclusion() {
    let dir = tempfile::tempdir().unwrap();
    let (model, patterns) = toy_pattern(dir.path(), "x (y | z) y", "F");
    let r = run(&["pattern-check", path(&patterns), "--model", path(&model)]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains("witness [x y y]"), "{}", r.out);
}

#[test]
fn pattern_check_rejects_a_star_declared_finite() {
    let dir = tempfile::tempdir().unwrap();
    let (model, patterns) = toy_pattern(dir.path(), "x* (y | z)", "F");
    let r = run(&["pattern-check", path(&patterns), "--model", path(&model)]);
    assert_eq!(r.code, 1);
    assert!(r.out.starts_with("P1 error:"), "{}", r.out);
    assert!(
        r.out.contains("declared Type-F but its language is Type-I"),
        "{}",
        r.out
    );
}

#[test]
fn generate_writes_the_requested_failure_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let r = generate_example(&out, "7", &[]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("1000 records, 200 failure, 800 normal"), "{}", r.out);
    let records = fs::read_to_string(out.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 1000);
    assert_eq!(records.matches(r#""label":"failure""#).count(), 200);
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let [a, b, c] = ["a", "b", "c"].map(|d| dir.path().join(d));
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        assert_eq!(generate_example(out, seed, &["--oversample"]).code, 0);
    }
    for file in ["records.jsonl", "manifest.json", "train_oversampled.jsonl"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    assert_ne!(
        fs::read(a.join("records.jsonl")).unwrap(),
        fs::read(c.join("records.jsonl")).unwrap()
    );
}

#[test]
fn generate_grid_writes_sixty_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("example.json");
    let patterns = fixture("example.patterns.json");
    let r = run(&[
        "--seed",
        "1",
        "generate",
        "--model",
        &model,
        "--patterns",
        &patterns,
        "--grid",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let manifests = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().join("manifest.json").is_file())
        .count();
    assert_eq!(manifests, 60);
    assert!(r.out.ends_with("60 datasets\n"));
}

#[test]
fn generate_names_the_component_that_cannot_fit() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "--seed",
        "1",
        "generate",
        "--model",
        &fixture("m2.json"),
        "--patterns",
        &fixture("m2.patterns.json"),
        "--size",
        "10",
        "--mlsl",
        "4",
        "--failure-pct",
        "10",
        "--type",
        "I",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("m2"), "{}", r.err);
}

#[test]
fn audit_passes_fresh_data() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_example(dir.path(), "3", &["--split"]).code, 0);
    let r = run(&["audit", path(dir.path())]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert_eq!(r.out.trim(), "audited 1000 of 1000 records: 0 violations");
}

fn edit_record(dir: &Path, index: usize, edit: impl FnOnce(&mut Value)) {
    let file = dir.join("records.jsonl");
    let text = fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut record: Value = serde_json::from_str(&lines[index]).unwrap();
    edit(&mut record);
    lines[index] = record.to_string();
    fs::write(&file, lines.join("\n") + "\n").unwrap();
}

fn first_with_label(dir: &Path, label: &str) -> usize {
    fs::read_to_string(dir.join("records.jsonl"))
        .unwrap()
        .lines()
        .position(|l| l.contains(&format!(r#""label":"{label}""#)))
        .unwrap()
}

#[test]
fn audit_flags_a_flipped_label() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_example(dir.path(), "3", &[]).code, 0);
    let i = first_with_label(dir.path(), "failure");
    edit_record(dir.path(), i, |r| {
        r["label"] = "normal".into();
        r["pattern"] = Value::Null;
    });
    let r = run(&["audit", path(dir.path())]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains(&format!("record {i} (normal)")), "{}", r.out);
    assert!(r.err.contains(&format!("records: {i}")), "{}", r.err);
}

#[test]
fn audit_flags_a_record_longer_than_mlsl() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_example(dir.path(), "3", &[]).code, 0);
    let i = first_with_label(dir.path(), "normal");
    // Accepted by the example model and outside every finite pattern.
    let long: Vec<&str> = std::iter::once("c").chain(["b"; 100]).chain(["c"]).collect();
    edit_record(dir.path(), i, |r| r["seq"] = long.into());
    let r = run(&["audit", path(dir.path())]);
    assert_eq!(r.code, 1);
    assert!(
        r.out
            .contains(&format!("record {i} (normal): length 102 exceeds mlsl 100")),
        "{}",
        r.out
    );
    assert!(r.err.contains(&i.to_string()), "{}", r.err);
}

/// Task id, (template, failure message) rows in time order, label.
type Task<'a> = (&'a str, &'a [(&'a str, bool)], &'a str);

fn write_corpus(dir: &Path, tasks: &[Task]) -> (PathBuf, PathBuf) {
    let records = dir.join("records.csv");
    let labels = dir.join("labels.csv");
    let mut r = String::from("task_id,timestamp,template_id,is_failure_message\n");
    let mut l = String::from("task_id,label\n");
    for (task, lines, label) in tasks {
        for (t, (template, failure)) in lines.iter().enumerate() {
            r.push_str(&format!("{task},{t},{template},{failure}\n"));
        }
        l.push_str(&format!("{task},{label}\n"));
    }
    fs::write(&records, r).unwrap();
    fs::write(&labels, l).unwrap();
    (records, labels)
}

#[test]
fn ingest_reports_dropped_tasks_and_caps_length() {
    let dir = tempfile::tempdir().unwrap();
    let long: Vec<(&str, bool)> = (0..12).map(|i| (["T1", "T2", "T3"][i % 3], false)).collect();
    let (records, labels) = write_corpus(
        dir.path(),
        &[
            ("a", &long, "normal"),
            (
                "b",
                &[("T1", false), ("T2", false), ("T9", true), ("T3", false)],
                "failure",
            ),
            ("c", &[("T9", true), ("T1", false)], "failure"),
        ],
    );
    let out = dir.path().join("out");
    let r = run(&[
        "ingest",
        "--records",
        path(&records),
        "--labels",
        path(&labels),
        "--cap",
        "10",
        "--out",
        path(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "dropped task c: first message is a failure message");
    assert_eq!(lines[1], "2 sequences, 50.00% failures");
    assert_eq!(lines[2], "unique_templates=3 avg_lsl=6.00 min_lsl=2 max_lsl=10");
    let written = fs::read_to_string(out.join("records.jsonl")).unwrap();
    assert_eq!(written.lines().count(), 2);
}

#[test]
fn ingest_openstack_shaped_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let labels = dir.path().join("labels.csv");
    let mut r = String::from("task_id,timestamp,template_id,is_failure_message\n");
    let mut l = String::from("task_id,label\n");
    for task in 0..876 {
        let failing = task % 876 < 188;
        for t in 0..5 {
            r.push_str(&format!("task-{task},{},E{},{}\n", 5 - t, t + 1, failing && t == 1));
        }
        l.push_str(&format!("task-{task},{}\n", if failing { "failure" } else { "normal" }));
    }
    fs::write(&records, r).unwrap();
    fs::write(&labels, l).unwrap();
    let out = dir.path().join("out");
    let run = run(&[
        "ingest",
        "--records",
        path(&records),
        "--labels",
        path(&labels),
        "--out",
        path(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.err);
    assert!(run.out.starts_with("876 sequences, 21.46% failures\n"), "{}", run.out);
    // Timestamps run backwards, so the failure message at t=1 comes fourth.
    assert!(run.out.contains("min_lsl=3 max_lsl=5"), "{}", run.out);
}

#[test]
fn advise_examples() {
    let r = run(&["advise", "--size", "5000", "--failure-pct", "10", "--mlsl", "100"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "config=CNN+L\nexpected_f1=0.985\nbatch_size=60\nepochs=20\n");

    let r = run(&["advise", "--size", "300", "--failure-pct", "20", "--mlsl", "100"]);
    assert!(r.out.starts_with("config=CNN+B\nexpected_f1=0.816\n"), "{}", r.out);

    let r = run(&[
        "--json",
        "advise",
        "--size",
        "1000",
        "--failure-pct",
        "10",
        "--mlsl",
        "1000",
    ]);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(
        v,
        serde_json::json!({"config": "BiLSTM+B", "expected_f1": 0.664, "batch_size": 5, "epochs": 10})
    );
}

#[test]
fn advise_warns_when_extrapolating() {
    let r = run(&["advise", "--size", "100", "--failure-pct", "20", "--mlsl", "100"]);
    assert_eq!(r.code, 0);
    assert!(
        r.err.starts_with("warning: inputs lie outside the studied ranges"),
        "{}",
        r.err
    );
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["advise", "--size", "100"]).code, 2);
    assert_eq!(
        run(&["advise", "--size", "100", "--failure-pct", "0", "--mlsl", "5"]).code,
        2
    );
    assert_eq!(
        run(&[
            "generate",
            "--model",
            "m.json",
            "--patterns",
            "p.json",
            "--grid",
            "--size",
            "5"
        ])
        .code,
        2
    );
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn rendered_export_uses_catalog_text() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_example(dir.path(), "5", &["--rendered", "--csv"]).code, 0);
    let rendered = fs::read_to_string(dir.path().join("records.log")).unwrap();
    let first = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    let first: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let catalog = [
        ("a", "receiving block * src: * dest: *"),
        ("b", "received block * of size * from *"),
        ("c", "sent block * in *"),
        ("d", "deleting block * file *"),
    ];
    let expected: Vec<&str> = first["seq"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| catalog.iter().find(|(id, _)| id == &s.as_str().unwrap()).unwrap().1)
        .collect();
    let block: Vec<&str> = rendered.split("\n\n").next().unwrap().lines().collect();
    assert_eq!(block, expected);
    assert!(rendered.lines().any(|l| l == "sent block * in *"));
    let csv = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn stats_of_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(generate_example(dir.path(), "5", &[]).code, 0);
    let r = run(&["stats", path(dir.path())]);
    assert_eq!(r.code, 0);
    assert!(r.out.starts_with("1000 sequences, 20.00% failures\n"), "{}", r.out);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_logsynth");
    let status = Command::new(bin)
        .args(["model-validate", &fixture("example.json")])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&status.stdout).lines().next(),
        Some("states=4 transitions=12 sValue(q0)=2")
    );
    let status = Command::new(bin)
        .args(["model-validate", "/nonexistent/model.json"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}
