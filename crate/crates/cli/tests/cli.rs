use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uniprofile")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn canonical(dir: &Path) -> String {
    let path = dir.join("universities.json");
    let raw = fixture("universities.data");
    let out = run(&["integrate", raw.to_str().unwrap(), "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicates dropped: 1"));
    path.to_str().unwrap().to_string()
}

#[test]
fn integrate_then_arff() {
    let dir = tempfile::tempdir().unwrap();
    let data = canonical(dir.path());
    let arff = stdout(&run(&["arff", "--data", &data]));
    assert_eq!(arff, std::fs::read_to_string(fixture("universities.arff")).unwrap());
}

#[test]
fn ingest_dumps_one_record_per_line() {
    let raw = fixture("universities.data");
    let text = stdout(&run(&["ingest", raw.to_str().unwrap()]));
    assert_eq!(text.lines().count(), 10);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["name"], "ADELPHI");
}

#[test]
fn ingest_reports_errors_with_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.data");
    std::fs::write(&bad, "(def-instance A (state ohio)) (def-instance B (state").unwrap();
    let out = run(&["ingest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn stats_formats() {
    let dir = tempfile::tempdir().unwrap();
    let data = canonical(dir.path());
    let text = stdout(&run(&["stats", "--data", &data]));
    assert_eq!(text, std::fs::read_to_string(fixture("summary.golden.txt")).unwrap());
    let rows = stdout(&run(&["stats", "--data", &data, "--attribute", "academic-emphasis", "--format", "jsonl"]));
    assert_eq!(rows.lines().count(), 7);
    assert!(!run(&["stats", "--data", &data, "--attribute", "nope"]).status.success());
}

#[test]
fn recommend_from_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let data = canonical(dir.path());
    let events = dir.path().join("events.jsonl");
    std::fs::write(
        &events,
        concat!(
            r#"{"event_id":1,"user_id":"ana","timestamp_ms":0,"kind":"register","payload":{"seeds":[{"attribute":"control","value":"STATE"}]}}"#,
            "\n",
            r#"{"event_id":2,"user_id":"ana","timestamp_ms":5,"kind":"click","payload":{"university":"CCNY"}}"#,
            "\n",
        ),
    )
    .unwrap();
    let events = events.to_str().unwrap();
    let text = stdout(&run(&["recommend", "--data", &data, "--events", events, "--user", "ana", "-k", "2"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("CCNY"), "{text}");

    let jsonl = stdout(&run(&["recommend", "--data", &data, "--events", events, "--user", "ana", "-k", "9", "--format", "jsonl"]));
    assert_eq!(jsonl.lines().count(), 9);

    let buckets = stdout(&run(&[
        "class-recommend", "--data", &data, "--events", events, "--user", "ana", "--attribute", "control", "--per-class", "1",
    ]));
    assert!(buckets.contains("[PRIVATE]") && buckets.contains("[STATE]"));

    let unknown = run(&["recommend", "--data", &data, "--events", events, "--user", "zed"]);
    assert!(!unknown.status.success());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown user"));
}

#[test]
fn search_is_read_only() {
    let dir = tempfile::tempdir().unwrap();
    let data = canonical(dir.path());
    let text = stdout(&run(&["search", "--data", &data, "cal-tech"]));
    assert!(text.lines().next().unwrap().ends_with("CAL-TECH"));
    let hits = stdout(&run(&["search", "--data", &data, "engineering boston", "--format", "jsonl"]));
    assert!(hits.lines().count() >= 2);
}
