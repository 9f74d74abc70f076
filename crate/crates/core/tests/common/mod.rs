#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, TimeZone, Utc};
use stancemap::clock::FixedClock;
use stancemap::ingestion::{ingest_claims, ingest_documents, ingest_tweets, read_jsonl, IngestContext, OfflineResolver};
use stancemap::store::Store;

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sample")
}

pub fn clock() -> FixedClock {
    FixedClock(Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap())
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn records(path: &Path) -> Vec<Result<serde_json::Value, String>> {
    read_jsonl(BufReader::new(File::open(path).unwrap())).unwrap()
}

/// Loads the sample claims, their tweets (offline geocoding) and documents.
pub fn load_sample(store: &dyn Store) {
    let dir = sample_dir();
    ingest_claims(store, records(&dir.join("claims.jsonl"))).unwrap();
    let resolver = OfflineResolver;
    let clock = clock();
    let ctx = IngestContext {
        resolver: &resolver,
        clock: &clock,
        limiter: None,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir.join("tweets"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    for path in files {
        let claim_id = path.file_stem().unwrap().to_str().unwrap().to_string();
        ingest_tweets(store, records(&path), &claim_id, &ctx).unwrap();
    }
    ingest_documents(store, records(&dir.join("documents.jsonl"))).unwrap();
}
