//! Read-only JSON API over a stancemap store.
//!
//! Every handler takes one snapshot at the start of the request and answers
//! from it alone, so a response never mixes data from before and after a
//! write and repeated requests between writes return identical bytes.
//!
//! List endpoints return bare JSON arrays, paginated with `cursor` and
//! `limit` (default 100, at most 1000). When more items remain, the
//! `X-Next-Cursor` response header carries the cursor of the next page.

mod error;
mod params;

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use stancemap::analytics::{
    city_breakdown, cluster_markers, daily_series, group_reports, observations, Dimension, MarkerPoint, StanceCounts,
};
use stancemap::states::normalize_state;
use stancemap::store::{FileStore, Snapshot, Store, StoreError};
use stancemap::StanceLabel;
use tokio::net::TcpListener;

pub use error::{ApiError, ErrorBody};
pub use params::{BBox, Page, Params, DEFAULT_LIMIT, MAX_LIMIT};

pub const NEXT_CURSOR: &str = "x-next-cursor";

type SnapshotFn = dyn Fn() -> Result<Snapshot, StoreError> + Send + Sync;

/// Where handlers get their snapshot from.
#[derive(Clone)]
pub struct AppState {
    source: Arc<SnapshotFn>,
}

impl AppState {
    pub fn new(store: Arc<dyn Store>) -> Self {
        AppState {
            source: Arc::new(move || Ok(store.snapshot())),
        }
    }

    /// Serves a store file that other processes may append to: each request
    /// first picks up completed batches written since the last one.
    pub fn watching(store: Arc<FileStore>) -> Self {
        AppState {
            source: Arc::new(move || {
                store.refresh()?;
                Ok(store.snapshot())
            }),
        }
    }

    fn snapshot(&self) -> Result<Snapshot, ApiError> {
        (self.source)().map_err(ApiError::from)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/topics", get(topics))
        .route("/api/claims", get(claims))
        .route("/api/clusters", get(clusters))
        .route("/api/stats/stance", get(stance_stats))
        .route("/api/stats/cities", get(city_stats))
        .route("/api/stats/timeline", get(timeline))
        .route("/api/reports/alignment", get(alignment))
        .route("/api/pairs/{pair_id}", get(pair_detail))
        .fallback(|| async { ApiError::NotFound("no such endpoint".into()) })
        .with_state(state)
}

/// Serves on an already bound listener until the process ends.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic: String,
    pub claim_count: usize,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub claim_id: String,
    pub text: String,
    /// Six-level verdict, e.g. "Mostly False".
    pub verdict: String,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceStats {
    /// "national", or the canonical name of the filtered state.
    pub scope: String,
    #[serde(flatten)]
    pub counts: StanceCounts,
    /// Matching pairs without a stance label yet.
    pub unclassified: u64,
    /// Every matching pair, classified or not.
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub latitude: f64,
    pub longitude: f64,
}

/// What a map popup shows for one pair. Carries no user identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDetail {
    pub tweet_text: String,
    pub claim_text: String,
    pub verdict: String,
    pub stance: Option<StanceLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Coordinates>,
    pub created_at: DateTime<Utc>,
}

fn json_response<T: Serialize>(value: &T, next: Option<String>) -> Response {
    match serde_json::to_vec(value) {
        Ok(body) => {
            let mut response = (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], body).into_response();
            if let Some(cursor) = next.and_then(|c| HeaderValue::from_str(&c).ok()) {
                response.headers_mut().insert(NEXT_CURSOR, cursor);
            }
            response
        }
        Err(e) => ApiError::Internal(e.to_string()).into_response(),
    }
}

fn paged<T: Serialize>(params: &Params, items: Vec<T>) -> Result<Response, ApiError> {
    let (page, next) = params.page()?.apply(items);
    Ok(json_response(&page, next))
}

async fn topics(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&[], false, true)?;
    let snap = state.snapshot()?;
    let mut by_topic: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for claim in snap.claims() {
        let pairs = snap.pairs_for_claim(&claim.claim_id).count();
        for topic in &claim.topics {
            let entry = by_topic.entry(topic).or_default();
            entry.0 += 1;
            entry.1 += pairs;
        }
    }
    let mut out: Vec<TopicSummary> = by_topic
        .into_iter()
        .map(|(topic, (claim_count, pair_count))| TopicSummary {
            topic: topic.to_string(),
            claim_count,
            pair_count,
        })
        .collect();
    out.sort_by(|a, b| b.pair_count.cmp(&a.pair_count).then_with(|| a.topic.cmp(&b.topic)));
    paged(&params, out)
}

/// Claims carrying any of the `topics`; every claim when none are given.
/// Unknown topics simply match nothing.
async fn claims(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&["topics"], false, true)?;
    let wanted: Vec<String> = params.many("topics").into_iter().map(stancemap::model::normalize_topic).collect();
    let snap = state.snapshot()?;
    let out: Vec<ClaimSummary> = snap
        .claims()
        .filter(|c| wanted.is_empty() || wanted.iter().any(|t| c.topics.contains(t)))
        .map(|c| ClaimSummary {
            claim_id: c.claim_id.clone(),
            text: c.text.clone(),
            verdict: c.verdict.as_str().to_string(),
            pair_count: snap.pairs_for_claim(&c.claim_id).count(),
        })
        .collect();
    paged(&params, out)
}

async fn clusters(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&["zoom", "bbox"], true, true)?;
    let zoom: u8 = params
        .parsed("zoom")?
        .ok_or_else(|| ApiError::BadRequest("zoom is required".into()))?;
    let bbox = match params.one("bbox")? {
        None => BBox::WORLD,
        Some(b) => b.parse().map_err(ApiError::BadRequest)?,
    };
    let filter = params.filter()?;
    let snap = state.snapshot()?;
    let points: Vec<MarkerPoint> = observations(&snap, snap.query_pairs(&filter)?)
        .into_iter()
        .filter_map(|o| {
            let place = o.place?;
            bbox.contains(place.latitude, place.longitude).then_some(MarkerPoint {
                pair_id: o.pair_id,
                latitude: place.latitude,
                longitude: place.longitude,
                stance: o.stance,
            })
        })
        .collect();
    paged(&params, cluster_markers(&points, zoom)?)
}

async fn stance_stats(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&[], true, false)?;
    let filter = params.filter()?;
    let snap = state.snapshot()?;
    let mut counts = StanceCounts::default();
    let mut unclassified = 0;
    for pair in snap.query_pairs(&filter)? {
        match pair.stance {
            Some(label) => counts.add(label),
            None => unclassified += 1,
        }
    }
    let scope = match filter.state.as_deref().and_then(normalize_state) {
        Some(s) => s.name.to_string(),
        None => "national".to_string(),
    };
    let stats = StanceStats {
        scope,
        total: counts.total() + unclassified,
        counts,
        unclassified,
    };
    Ok(json_response(&stats, None))
}

async fn city_stats(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&[], true, true)?;
    let filter = params.filter()?;
    let snap = state.snapshot()?;
    let obs = observations(&snap, snap.query_pairs(&filter)?);
    let code = filter.state.as_deref().and_then(normalize_state).map(|s| s.code);
    paged(&params, city_breakdown(&obs, code))
}

async fn timeline(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&[], true, true)?;
    let filter = params.filter()?;
    let snap = state.snapshot()?;
    let obs = observations(&snap, snap.query_pairs(&filter)?);
    paged(&params, daily_series(&obs).buckets)
}

async fn alignment(State(state): State<AppState>, RawQuery(q): RawQuery) -> Result<Response, ApiError> {
    let params = Params::parse(q.as_deref());
    params.allow(&["dimension", "top"], true, true)?;
    let dimension: Dimension = params
        .one("dimension")?
        .ok_or_else(|| ApiError::BadRequest("dimension is required".into()))?
        .parse()?;
    let top: Option<usize> = params.parsed("top")?;
    let filter = params.filter()?;
    let snap = state.snapshot()?;
    let obs = observations(&snap, snap.query_pairs(&filter)?);
    paged(&params, group_reports(&obs, dimension, top))
}

async fn pair_detail(
    State(state): State<AppState>,
    Path(pair_id): Path<String>,
    RawQuery(q): RawQuery,
) -> Result<Response, ApiError> {
    Params::parse(q.as_deref()).allow(&[], false, false)?;
    let snap = state.snapshot()?;
    let missing = || ApiError::NotFound(format!("no pair {pair_id:?}"));
    let pair = snap.pair(&pair_id).ok_or_else(missing)?;
    let claim = snap.claim(&pair.claim_id).ok_or_else(missing)?;
    let tweet = snap.tweet(&pair.tweet_id).ok_or_else(missing)?;
    let detail = PairDetail {
        tweet_text: tweet.text.clone(),
        claim_text: claim.text.clone(),
        verdict: claim.verdict.as_str().to_string(),
        stance: pair.stance,
        coordinates: tweet.geo.as_ref().map(|g| Coordinates {
            latitude: g.latitude,
            longitude: g.longitude,
        }),
        created_at: tweet.created_at,
    };
    Ok(json_response(&detail, None))
}
