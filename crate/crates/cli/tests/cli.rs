use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value;
use stancemap_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_PARTIAL};
use tempfile::TempDir;

const NOW: &str = "2024-06-01T00:00:00Z";

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/sample")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(self.stdout.trim()).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["stancemap"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ingests the sample corpus and classifies it; returns the manifest checksum.
fn pipeline(store: &Path) -> String {
    let s = path(store);
    let claims = cli(&["--store", s, "--now", NOW, "--json", "ingest-claims", "--input", path(&sample().join("claims.jsonl"))]);
    // The sample deliberately contains one invalid claim.
    assert_eq!(claims.code, EXIT_PARTIAL, "{}", claims.stderr);
    assert_eq!(claims.json()["rejected"].as_array().unwrap().len(), 1);
    let mut files: Vec<PathBuf> = std::fs::read_dir(sample().join("tweets")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files {
        let claim = f.file_stem().unwrap().to_str().unwrap();
        let r = cli(&["--store", s, "--now", NOW, "ingest-tweets", "--input", path(&f), "--claim-id", claim]);
        assert_eq!(r.code, EXIT_OK, "{} {}", r.stdout, r.stderr);
    }
    let docs = cli(&["--store", s, "ingest-documents", "--input", path(&sample().join("documents.jsonl"))]);
    assert_eq!(docs.code, EXIT_OK, "{}", docs.stderr);
    let classify = cli(&["--store", s, "--now", NOW, "--concurrency", "3", "--json", "classify"]);
    assert_eq!(classify.code, EXIT_OK, "{}", classify.stderr);
    let dir = store.with_extension("export");
    let export = cli(&["--store", s, "--json", "export", "--dir", path(&dir)]);
    assert_eq!(export.code, EXIT_OK);
    export.json()["checksum"].as_str().unwrap().to_string()
}

#[test]
fn full_pipeline_is_idempotent() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.jsonl");
    let first = pipeline(&a);
    let again = pipeline(&a);
    let fresh = pipeline(&tmp.path().join("b.jsonl"));
    assert_eq!(first, again);
    assert_eq!(first, fresh);

    let counts = cli(&["--store", path(&a), "--json", "export", "--dir", path(&tmp.path().join("x"))]).json();
    assert_eq!(counts["counts"]["claims"], 6);
    assert_eq!(counts["counts"]["pairs"], 54);
    let second = cli(&["--store", path(&a), "--json", "classify"]).json();
    assert_eq!((second["classified"].as_u64(), second["skipped"].as_u64()), (Some(0), Some(54)));
}

#[test]
fn classify_is_deterministic_across_stores() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a.jsonl"), tmp.path().join("b.jsonl"));
    pipeline(&a);
    pipeline(&b);
    let reclass = cli(&["--store", path(&a), "--now", NOW, "--concurrency", "1", "--json", "classify", "--reclassify"]);
    assert_eq!(reclass.json()["classified"], 54);
    let sums: Vec<String> = [&a, &b]
        .iter()
        .map(|s| cli(&["--store", path(s), "--json", "export", "--dir", path(&s.with_extension("d"))]).json()["checksum"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(sums[0], sums[1]);
}

#[test]
fn evaluate_confusion_fixture() {
    let fixture = fixtures().join("stance_verdict_counts.jsonl");
    let r = cli(&["--json", "evaluate", "--fixture", path(&fixture)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v = r.json();
    let rows = v["confusion"]["rows"].as_array().unwrap();
    let precision: Vec<f64> = rows.iter().map(|r| r["precision"].as_f64().unwrap()).collect();
    for (got, want) in precision.iter().zip([9.0, 10.9, 83.1]) {
        assert!((got - want).abs() <= 0.4, "{got} vs {want}");
    }
    let recall = &v["confusion"]["recall"];
    assert!((recall["Truth"].as_f64().unwrap() - 58.0).abs() <= 0.4);
    let text = cli(&["evaluate", "--fixture", path(&fixture)]);
    assert!(text.stdout.contains("recall"));
    assert!(text.stdout.contains("64643"));
}

#[test]
fn evaluate_alignment_fixture() {
    let r = cli(&["--json", "evaluate", "--fixture", path(&fixtures().join("alignment_counts.jsonl"))]);
    assert_eq!(r.code, EXIT_OK);
    let leaning = r.json()["alignment"]["leaning"].as_array().unwrap().clone();
    let red = leaning.iter().find(|r| r["group"] == "Red").unwrap();
    assert_eq!(red["balanced_accuracy"], 52.1);
    assert_eq!(red["macro_f1"], 35.3);
}

#[test]
fn evaluate_and_export_report_from_store() {
    let tmp = TempDir::new().unwrap();
    let store = tmp.path().join("s.jsonl");
    pipeline(&store);
    let eval = cli(&["--store", path(&store), "--json", "evaluate"]);
    assert_eq!(eval.code, EXIT_OK);
    assert_eq!(eval.json()["pairs"], 54);
    assert!(eval.json()["alignment"]["topic"].is_array());

    let csv = tmp.path().join("topics.csv");
    let r = cli(&["--store", path(&store), "export-report", "--format", "csv", "--output", path(&csv)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("group,truth_pos_pct,truth_pos,truth_neg_pct,truth_neg,misinfo_pos_pct,misinfo_pos,misinfo_neg_pct,misinfo_neg,balanced_accuracy,macro_f1\n"));

    let json = tmp.path().join("confusion.json");
    let r = cli(&["--store", path(&store), "export-report", "--format", "json", "--report", "confusion", "--output", path(&json)]);
    assert_eq!(r.code, EXIT_OK);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let total: u64 = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| ["truth", "mixed", "misinfo"].iter().map(|k| r[k].as_u64().unwrap()).sum::<u64>())
        .sum();
    assert_eq!(total, 54);

    let bad = cli(&["--store", path(&store), "export-report", "--format", "csv", "--output", path(&csv), "--dimension", "planet"]);
    assert_eq!(bad.code, EXIT_INVALID);
}

#[test]
fn validation_failures_touch_nothing() {
    let tmp = TempDir::new().unwrap();
    let store = tmp.path().join("s.jsonl");
    let s = path(&store);

    let missing = cli(&["--store", s, "ingest-claims", "--input", path(&tmp.path().join("nope.jsonl"))]);
    assert_eq!(missing.code, EXIT_INVALID);
    assert!(!store.exists());

    let no_store = cli(&["ingest-claims", "--input", path(&sample().join("claims.jsonl"))]);
    assert_eq!(no_store.code, EXIT_INVALID);
    assert!(no_store.stderr.contains("--store"));

    let remote = cli(&["--store", s, "--provider", "remote", "classify"]);
    assert_eq!(remote.code, EXIT_INVALID);
    assert!(remote.stderr.contains("classifier_url"));
    assert!(!store.exists());

    let unknown = cli(&["--store", s, "ingest-tweets", "--input", path(&sample().join("tweets/c-jobs.jsonl")), "--claim-id", "c-jobs"]);
    assert_eq!(unknown.code, EXIT_INVALID);
    assert!(unknown.stderr.contains("unknown claim"));

    assert_eq!(cli(&["--store", s, "frobnicate"]).code, EXIT_INVALID);
    assert_eq!(cli(&["--help"]).code, EXIT_OK);

    let config = tmp.path().join("c.toml");
    std::fs::write(&config, "[remote]\napi_key = 'secret'\n").unwrap();
    let r = cli(&["--config", path(&config), "--store", s, "evaluate"]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("api_key"));
    assert!(!r.stderr.contains("secret") && !r.stdout.contains("secret"));

    let json_err = cli(&["--json", "--store", s, "import", "--dir", path(&tmp.path().join("absent"))]);
    assert_eq!(json_err.code, EXIT_INVALID);
    assert_eq!(json_err.json()["error"], "validation");
}

#[test]
fn export_import_round_trip() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.jsonl");
    let checksum = pipeline(&a);
    let b = tmp.path().join("b.jsonl");
    let r = cli(&["--store", path(&b), "--json", "import", "--dir", path(&a.with_extension("export"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.json()["checksum"], checksum);
}

#[test]
fn geocode_text_and_stored() {
    let r = cli(&["--json", "geocode", "--text", "Seattle, WA"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.json()["resolved"]["state"], "Washington");
    let none = cli(&["geocode", "--text", "somewhere over the rainbow"]);
    assert!(none.stdout.contains("no match"));

    let tmp = TempDir::new().unwrap();
    let store = tmp.path().join("s.jsonl");
    pipeline(&store);
    let stored = cli(&["--store", path(&store), "--now", NOW, "--json", "geocode"]);
    assert_eq!(stored.code, EXIT_OK);
    assert_eq!(stored.json()["resolved"], 0);
}

#[test]
fn serve_answers_topics() {
    let tmp = TempDir::new().unwrap();
    let store = tmp.path().join("s.jsonl");
    pipeline(&store);
    let mut child = Command::new(env!("CARGO_BIN_EXE_stancemap"))
        .args(["--store", path(&store), "serve", "--listen", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().trim_start_matches("listening on http://").to_string();
    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/topics HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    let topics: Value = serde_json::from_str(body).unwrap();
    assert_eq!(topics.as_array().unwrap().len(), 6);
}
