#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use stancemap::clock::FixedClock;
use stancemap::ingestion::{ingest_claims, ingest_documents, ingest_tweets, read_jsonl, IngestContext, OfflineResolver};
use stancemap::model::ClaimTweetPair;
use stancemap::pipeline::{mock_providers, run_batch, BatchOptions, PipelineConfig};
use stancemap::store::{MemoryStore, RecordBatch, Store};
use stancemap_server::{router, AppState};
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).expect("JSON body")
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let body = to_bytes(response.into_body(), usize::MAX).await.unwrap().to_vec();
    Reply { status, headers, body }
}

pub fn app(store: Arc<MemoryStore>) -> Router {
    router(AppState::new(store))
}

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/sample")
}

fn records(path: &Path) -> Vec<Result<serde_json::Value, String>> {
    read_jsonl(BufReader::new(File::open(path).unwrap())).unwrap()
}

pub fn clock() -> FixedClock {
    FixedClock(Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap())
}

/// The sample claims, tweets and documents, unclassified.
pub fn sample_store() -> Arc<MemoryStore> {
    let store = Arc::new(MemoryStore::new());
    let dir = sample_dir();
    ingest_claims(store.as_ref(), records(&dir.join("claims.jsonl"))).unwrap();
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
        ingest_tweets(store.as_ref(), records(&path), &claim_id, &ctx).unwrap();
    }
    ingest_documents(store.as_ref(), records(&dir.join("documents.jsonl"))).unwrap();
    store
}

/// The sample store with every pair classified by the mock providers.
pub fn classified_sample() -> Arc<MemoryStore> {
    let store = sample_store();
    let snap = store.snapshot();
    let pairs: Vec<ClaimTweetPair> = snap.pairs().cloned().collect();
    let mut commit = |p: ClaimTweetPair| {
        store
            .put_records(RecordBatch::Pairs(vec![p]))
            .map(|_| ())
            .map_err(|e| e.to_string())
    };
    let report = run_batch(
        &snap,
        &pairs,
        BatchOptions::default(),
        &PipelineConfig::default(),
        &mock_providers(),
        &clock(),
        &mut commit,
    );
    assert_eq!(report.failed, 0);
    store
}
