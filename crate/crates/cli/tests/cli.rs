use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn tripleproof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripleproof"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn run_fixture(name: &str) -> Output {
    let query = std::fs::read_to_string(fixtures().join(name).join("query.txt")).unwrap();
    tripleproof(&["--config", &path(&format!("{name}/config.json")), "run", query.trim()])
}

#[test]
fn solve_prints_one_line_per_model() {
    let o = tripleproof(&["solve", &path("asp/two_cycle.lp")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "[\"a\"]\n[\"b\"]\n");
}

#[test]
fn solve_unsatisfiable_prints_nothing() {
    let o = tripleproof(&["solve", &path("asp/constraint.lp")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
}

#[test]
fn solve_warns_when_truncated() {
    let o = tripleproof(&["solve", "--limit", "1", &path("asp/two_cycle.lp")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stderr(&o).contains("truncated"));
}

#[test]
fn solve_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lp");
    std::fs::write(&bad, "p(X) :- not q(X).\n").unwrap();
    let o = tripleproof(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: parse:"));
}

#[test]
fn classify_lists_pairs() {
    let o = tripleproof(&["classify", &path("el/chain.json")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pairs = v["pairs"].as_array().unwrap();
    assert!(pairs.contains(&serde_json::json!(["a", "c"])));
    assert!(!pairs.contains(&serde_json::json!(["c", "a"])));
}

#[test]
fn retrieve_ranks_documents() {
    let o = tripleproof(&["retrieve", "--k", "1", "--corpus", &path("retrieval/two_docs.jsonl"), "graphene"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["id"], "d1");
    assert!((v[0]["score"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn match_uses_the_config_ontology() {
    let o = tripleproof(&["--config", &path("battery/config.json"), "match", "conductor"]);
    assert!(o.status.success());
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["targetConcept"], "conductor");
    assert_eq!(first["accepted"], true);
}

#[test]
fn battery_run_verifies() {
    let o = run_fixture("battery");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["verified"], 1);
}

#[test]
fn healthcare_run_refutes() {
    let o = run_fixture("healthcare");
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["refuted"], 1);
}

#[test]
fn runs_are_byte_identical() {
    let first = run_fixture("healthcare").stdout;
    for _ in 0..2 {
        assert_eq!(run_fixture("healthcare").stdout, first);
    }
}

#[test]
fn verify_reads_a_triples_file() {
    let dir = tempfile::tempdir().unwrap();
    let triples = dir.path().join("t.json");
    std::fs::write(&triples, r#"{"@id":"patient2","hasDiagnosis":{"@id":"diseaseA"}}"#).unwrap();
    let out = dir.path().join("report.json");
    let o = tripleproof(&[
        "--config",
        &path("healthcare/config.json"),
        "verify",
        triples.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    // chest pain indicates disease A, but nothing forces the diagnosis
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdicts"][0]["status"], "unknown");
}

fn copy_fixture(name: &str, into: &Path) {
    std::fs::create_dir_all(into.join("mock")).unwrap();
    for entry in std::fs::read_dir(fixtures().join(name)).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            std::fs::copy(&p, into.join(p.file_name().unwrap())).unwrap();
        }
    }
}

#[test]
fn missing_ontology_fails_at_load() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture("battery", dir.path());
    std::fs::remove_file(dir.path().join("ontology.json")).unwrap();
    let config = dir.path().join("config.json");
    let o = tripleproof(&["--config", config.to_str().unwrap(), "run", "q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: load:"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn empty_corpus_still_builds_a_prompt() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture("battery", dir.path());
    std::fs::write(dir.path().join("corpus.jsonl"), "").unwrap();
    let config = dir.path().join("config.json");
    let o = tripleproof(&["--config", config.to_str().unwrap(), "prompt", "graphene"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["prompt"].as_str().unwrap().contains("Context:\n\n"));
    assert_eq!(v["hash"].as_str().unwrap().len(), 16);
}

#[test]
fn mock_miss_is_a_complete_error() {
    let o = tripleproof(&["--config", &path("battery/config.json"), "run", "an unseen question"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: complete:"), "{}", stderr(&o));
}
