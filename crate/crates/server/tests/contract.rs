//! API contract acceptance: endpoint schemas, agreement with direct store
//! queries under random filters, and byte-identical repeated responses.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::http::StatusCode;
use chrono::NaiveDate;
use common::{app, get, sample_store};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use stancemap::analytics::fixtures::{materialize_confusion, parse_confusion, STANCE_VERDICT_COUNTS};
use stancemap::model::ClaimTweetPair;
use stancemap::pipeline::{mock_providers, run_batch, BatchOptions, PipelineConfig};
use stancemap::store::{MemoryStore, PairFilter, RecordBatch, Store};
use stancemap::StanceLabel;
use stancemap_server::BBox;

/// The sample store with two thirds of its pairs classified, so that
/// filters see both labelled and unlabelled pairs.
fn mixed_store() -> Arc<MemoryStore> {
    let store = sample_store();
    let snap = store.snapshot();
    let pairs: Vec<ClaimTweetPair> = snap.pairs().enumerate().filter(|(i, _)| i % 3 != 0).map(|(_, p)| p.clone()).collect();
    let mut commit = |p: ClaimTweetPair| store.put_records(RecordBatch::Pairs(vec![p])).map(|_| ()).map_err(|e| e.to_string());
    run_batch(
        &snap,
        &pairs,
        BatchOptions::default(),
        &PipelineConfig::default(),
        &mock_providers(),
        &common::clock(),
        &mut commit,
    );
    store
}

const TOPICS: [&str; 7] = ["health", "economy", "crime", "elections", "environment", "education", "astrology"];
const CLAIMS: [&str; 6] = ["c-autism", "c-jobs", "c-crime", "c-ballots", "c-wind", "c-teachers"];
const STATES: [&str; 7] = ["TX", "Washington", "az", "New York", "FL", "Colorado", "MT"];
const STANCES: [StanceLabel; 3] = [StanceLabel::Negative, StanceLabel::NeutralNoStance, StanceLabel::Positive];

/// A random well-formed filter and its query string.
fn random_filter(rng: &mut StdRng) -> (PairFilter, String) {
    let mut filter = PairFilter::default();
    let mut query = Vec::new();
    if rng.random_bool(0.4) {
        let n = rng.random_range(1..=3);
        let picked: Vec<&str> = TOPICS.choose_multiple(rng, n).copied().collect();
        query.extend(picked.iter().map(|t| format!("topics={t}")));
        filter = filter.with_topics(picked);
    }
    if rng.random_bool(0.3) {
        let n = rng.random_range(1..=3);
        let picked: Vec<&str> = CLAIMS.choose_multiple(rng, n).copied().collect();
        query.extend(picked.iter().map(|c| format!("claim_ids={c}")));
        filter = filter.with_claims(picked.iter().map(|c| c.to_string()));
    }
    if rng.random_bool(0.4) {
        let s = *STATES.choose(rng).unwrap();
        query.push(format!("state={}", s.replace(' ', "+")));
        filter = filter.with_state(s);
    }
    if rng.random_bool(0.4) {
        let a = rng.random_range(0..3);
        let b = rng.random_range(a..3);
        query.push(format!("stance_min={}", STANCES[a].as_str()));
        query.push(format!("stance_max={}", STANCES[b].as_str()));
        filter = filter.with_stance_range(STANCES[a], STANCES[b]);
    }
    if rng.random_bool(0.4) {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let from = start + chrono::Duration::days(rng.random_range(0..1200));
        let to = from + chrono::Duration::days(rng.random_range(0..400));
        query.push(format!("date_from={from}"));
        query.push(format!("date_to={to}"));
        filter = filter.with_dates(Some(from), Some(to));
    }
    (filter, query.join("&"))
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[tokio::test]
async fn api_contract_suite() {
    let mut failures: Vec<String> = Vec::new();

    // Schemas against the fixture store.
    let store = mixed_store();
    let app = app(Arc::clone(&store));
    let schemas: [(&str, &[&str]); 7] = [
        ("/api/topics", &["topic", "claim_count", "pair_count"]),
        ("/api/claims?topics=health", &["claim_id", "text", "verdict", "pair_count"]),
        ("/api/clusters?zoom=5&bbox=-125,24,-66,50", &["cluster_id", "centroid", "pair_ids", "stance_breakdown"]),
        ("/api/stats/cities", &["city", "state", "positive", "neutral", "negative", "total"]),
        ("/api/stats/timeline", &["date", "positive", "neutral", "negative"]),
        (
            "/api/reports/alignment?dimension=topic",
            &[
                "group",
                "truth_pos",
                "truth_neg",
                "misinfo_pos",
                "misinfo_neg",
                "truth_pos_pct",
                "truth_neg_pct",
                "misinfo_pos_pct",
                "misinfo_neg_pct",
                "balanced_accuracy",
                "macro_f1",
            ],
        ),
        ("/api/reports/alignment?dimension=leaning", &[]),
    ];
    for (uri, fields) in schemas {
        let r = get(&app, uri).await;
        let body = r.json();
        let items = body.as_array().cloned().unwrap_or_default();
        if r.status != StatusCode::OK || !body.is_array() || (!fields.is_empty() && items.is_empty()) {
            failures.push(format!("{uri}: status {} body {body}", r.status));
            continue;
        }
        if let Some(bad) = items.iter().find(|i| !fields.is_empty() && keys(i) != set(fields)) {
            failures.push(format!("{uri}: item fields {:?}", keys(bad)));
        }
    }
    let stance = get(&app, "/api/stats/stance").await.json();
    if keys(&stance) != set(&["scope", "positive", "neutral", "negative", "unclassified", "total"]) {
        failures.push(format!("/api/stats/stance fields {:?}", keys(&stance)));
    }
    let some_pair = store.snapshot().pairs_for_claim("c-jobs").next().unwrap().pair_id.clone();
    let detail = get(&app, &format!("/api/pairs/{some_pair}")).await;
    let detail_fields = keys(&detail.json());
    if detail.status != StatusCode::OK
        || !detail_fields.is_subset(&set(&["tweet_text", "claim_text", "verdict", "stance", "coordinates", "created_at"]))
    {
        failures.push(format!("/api/pairs: {} {detail_fields:?}", detail.status));
    }
    if get(&app, "/api/pairs/missing").await.status != StatusCode::NOT_FOUND {
        failures.push("unknown pair is not 404".into());
    }

    // 50 random filters: stats and cluster membership agree with query_pairs.
    let snap = store.snapshot();
    let mut rng = StdRng::seed_from_u64(50);
    let mut nonzero = 0;
    for _ in 0..50 {
        let (filter, query) = random_filter(&mut rng);
        let expected = snap.query_pairs(&filter).unwrap();
        let stats = get(&app, &format!("/api/stats/stance?{query}")).await.json();
        let total = stats["total"].as_u64().unwrap_or(u64::MAX);
        let parts: u64 = ["positive", "neutral", "negative", "unclassified"]
            .iter()
            .map(|k| stats[k].as_u64().unwrap_or(0))
            .sum();
        if total != expected.len() as u64 || parts != total {
            failures.push(format!("stats for {query:?}: {total} vs query_pairs {}", expected.len()));
        }
        let bbox: BBox = "-125,24,-66,50".parse().unwrap();
        let in_box = expected
            .iter()
            .filter(|p| {
                snap.tweet(&p.tweet_id)
                    .and_then(|t| t.geo.as_ref())
                    .is_some_and(|g| bbox.contains(g.latitude, g.longitude))
            })
            .count();
        let sep = if query.is_empty() { "" } else { "&" };
        let clusters = get(&app, &format!("/api/clusters?zoom=6&bbox=-125,24,-66,50&limit=1000{sep}{query}")).await.json();
        let members: usize = clusters
            .as_array()
            .map(|cs| cs.iter().map(|c| c["pair_ids"].as_array().map_or(0, Vec::len)).sum())
            .unwrap_or(usize::MAX);
        if members != in_box {
            failures.push(format!("clusters for {query:?}: {members} members vs {in_box} geolocated"));
        }
        nonzero += usize::from(!expected.is_empty());
    }
    if nonzero < 10 {
        failures.push(format!("only {nonzero} of 50 random filters matched anything"));
    }

    // Repeated requests between writes.
    let uris = [
        "/api/topics",
        "/api/claims",
        "/api/clusters?zoom=3",
        "/api/stats/stance?state=TX",
        "/api/stats/cities",
        "/api/stats/timeline",
        "/api/reports/alignment?dimension=state",
        "/api/pairs/c-autism::t0000",
    ];
    for uri in uris {
        let (a, b) = (get(&app, uri).await, get(&app, uri).await);
        if a.body != b.body || a.status != b.status {
            failures.push(format!("{uri} differs between identical requests"));
        }
    }

    // National totals at the published corpus scale.
    let big = Arc::new(MemoryStore::new());
    let m = parse_confusion(STANCE_VERDICT_COUNTS).unwrap();
    for batch in materialize_confusion(&m, NaiveDate::from_ymd_opt(2022, 1, 1).unwrap()) {
        big.put_records(batch).unwrap();
    }
    let national = get(&common::app(big), "/api/stats/stance").await.json();
    let triple = (national["positive"].as_u64(), national["neutral"].as_u64(), national["negative"].as_u64());
    if triple != (Some(76_491), Some(12_425), Some(47_124)) {
        failures.push(format!("fixture-scale national totals {triple:?}"));
    }

    let ok = failures.is_empty();
    let detail = if ok {
        format!(
            "8 endpoints match their schemas, 50 random filters agree with query_pairs ({nonzero} non-empty), {} endpoints byte-identical on repeat, national totals 76491/12425/47124",
            uris.len()
        )
    } else {
        failures.join("; ")
    };
    println!("{} API contract suite: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{detail}");
}
