use std::collections::BTreeMap;
use std::io::BufRead;

use chrono::{DateTime, NaiveDate};
use serde::Serialize;
use serde_json::Value;

use super::geocode::{normalize_location, GeoResolver, GeocodeCache, GeocodeError, GeocodeResult};
use super::window::compute_time_window;
use super::{filter_tweet, IngestError, MIN_TWEET_CHARS};
use crate::clock::Clock;
use crate::model::{normalize_topic, Claim, ClaimTweetPair, Tweet, Verdict};
use crate::pipeline::{ContextDocument, SubjectKind};
use crate::rate::RateLimiter;
use crate::store::{Dataset, RecordBatch, Store};

/// A record that was not stored, with every reason found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based position in the input stream.
    pub index: usize,
    pub id: Option<String>,
    pub reasons: Vec<String>,
    /// Re-running may succeed (transport failures).
    pub retryable: bool,
}

impl Rejection {
    fn new(index: usize, id: Option<String>, reasons: Vec<String>) -> Self {
        Rejection {
            index,
            id,
            reasons,
            retryable: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClaimIngestReport {
    pub received: usize,
    /// New or changed claims.
    pub stored: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TweetIngestReport {
    pub received: usize,
    /// Tweets that passed the length and window filter.
    pub retained: usize,
    pub pairs_created: usize,
    /// Tweets dropped by the length/window filter.
    pub filtered: Vec<Rejection>,
    /// Malformed records.
    pub rejected: Vec<Rejection>,
    pub geocoded: usize,
    /// Retained tweets whose location lookup failed; they are stored without
    /// geography and can be retried with [`geocode_stored_tweets`].
    pub geocode_failures: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DocumentIngestReport {
    pub received: usize,
    pub stored: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GeocodeReport {
    pub attempted: usize,
    pub resolved: usize,
    pub unresolved: usize,
    pub failures: Vec<Rejection>,
}

/// Collaborators for location normalization during ingestion.
pub struct IngestContext<'a> {
    pub resolver: &'a dyn GeoResolver,
    pub clock: &'a dyn Clock,
    pub limiter: Option<&'a RateLimiter>,
}

/// Reads one JSON value per non-blank line. Parse failures are kept in place
/// so they can be itemized by position.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Result<Value, String>>, std::io::Error> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("malformed JSON: {e}")));
    }
    Ok(out)
}

fn string_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .or_else(|| DateTime::parse_from_rfc3339(raw).ok().map(|d| d.date_naive()))
}

fn parse_claim(value: &Value) -> Result<Claim, (Option<String>, Vec<String>)> {
    let Some(obj) = value.as_object() else {
        return Err((None, vec!["record is not a JSON object".into()]));
    };
    let mut reasons = Vec::new();
    let id = string_field(obj, "claim_id").filter(|s| !s.trim().is_empty());
    if id.is_none() {
        reasons.push("missing claim_id".to_string());
    }
    let text = string_field(obj, "text").unwrap_or_default();
    if text.trim().is_empty() {
        reasons.push("missing or empty text".to_string());
    }
    let verdict = match obj.get("verdict").and_then(Value::as_str) {
        None => {
            reasons.push("missing verdict".to_string());
            None
        }
        Some(v) => match v.parse::<Verdict>() {
            Ok(v) => Some(v),
            Err(_) => {
                reasons.push(format!("unknown verdict {v:?}"));
                None
            }
        },
    };
    let published_at = match obj.get("published_at").and_then(Value::as_str) {
        None => {
            reasons.push("missing date".to_string());
            None
        }
        Some(d) => {
            let parsed = parse_date(d);
            if parsed.is_none() {
                reasons.push(format!("invalid date {d:?}"));
            }
            parsed
        }
    };
    let topics: Vec<String> = match obj.get("topics") {
        Some(Value::Array(items)) => items.iter().filter_map(Value::as_str).map(normalize_topic).collect(),
        Some(Value::String(s)) => vec![normalize_topic(s)],
        _ => Vec::new(),
    };
    let topics: Vec<String> = topics.into_iter().filter(|t| !t.is_empty()).collect();
    if topics.is_empty() {
        reasons.push("empty topics".to_string());
    }
    match (id, verdict, published_at) {
        (Some(id), Some(verdict), Some(published_at)) if reasons.is_empty() => Ok(Claim {
            claim_id: id,
            text,
            topics: topics.into_iter().collect(),
            verdict,
            published_at,
            source_url: string_field(obj, "source_url"),
        }),
        (id, _, _) => Err((id, reasons)),
    }
}

/// Validates and stores claim records. Invalid records are itemized, never
/// silently dropped; re-ingesting identical records stores nothing new.
pub fn ingest_claims(
    store: &dyn Store,
    records: impl IntoIterator<Item = Result<Value, String>>,
) -> Result<ClaimIngestReport, IngestError> {
    let mut report = ClaimIngestReport::default();
    let mut claims = Vec::new();
    for (i, record) in records.into_iter().enumerate() {
        report.received += 1;
        match record {
            Err(e) => report.rejected.push(Rejection::new(i + 1, None, vec![e])),
            Ok(value) => match parse_claim(&value) {
                Ok(claim) => claims.push(claim),
                Err((id, reasons)) => report.rejected.push(Rejection::new(i + 1, id, reasons)),
            },
        }
    }
    report.stored = store.put_records(RecordBatch::Claims(claims))?;
    Ok(report)
}

/// Geocode cache reading through to a snapshot and collecting new entries.
struct CacheOverlay<'a> {
    base: &'a Dataset,
    fresh: BTreeMap<String, GeocodeResult>,
}

impl GeocodeCache for CacheOverlay<'_> {
    fn get(&self, key: &str) -> Option<GeocodeResult> {
        self.fresh.get(key).or_else(|| self.base.geocode(key)).cloned()
    }

    fn put(&mut self, result: GeocodeResult) {
        self.fresh.insert(result.query_text.clone(), result);
    }
}

/// Filters the posts retrieved for one claim, normalizes their locations,
/// stores them and creates one unclassified pair per retained post.
/// Existing pairs are left untouched.
pub fn ingest_tweets(
    store: &dyn Store,
    records: impl IntoIterator<Item = Result<Value, String>>,
    claim_id: &str,
    ctx: &IngestContext<'_>,
) -> Result<TweetIngestReport, IngestError> {
    let snapshot = store.snapshot();
    let claim = snapshot
        .claim(claim_id)
        .ok_or_else(|| IngestError::UnknownClaim(claim_id.to_string()))?;
    let window = compute_time_window(claim.published_at);
    let mut report = TweetIngestReport::default();
    let mut cache = CacheOverlay {
        base: &snapshot,
        fresh: BTreeMap::new(),
    };
    let mut tweets: Vec<Tweet> = Vec::new();

    for (i, record) in records.into_iter().enumerate() {
        report.received += 1;
        let index = i + 1;
        let value = match record {
            Ok(v) => v,
            Err(e) => {
                report.rejected.push(Rejection::new(index, None, vec![e]));
                continue;
            }
        };
        let id = value.get("tweet_id").and_then(Value::as_str).map(str::to_string);
        let mut tweet: Tweet = match serde_json::from_value(value) {
            Ok(t) => t,
            Err(e) => {
                report.rejected.push(Rejection::new(index, id, vec![e.to_string()]));
                continue;
            }
        };
        if let Err(e) = tweet.validate() {
            report.rejected.push(Rejection::new(index, id, vec![e.to_string()]));
            continue;
        }
        if !filter_tweet(&tweet, &window) {
            let mut reasons = Vec::new();
            if tweet.text.chars().count() < MIN_TWEET_CHARS {
                reasons.push(format!("text shorter than {MIN_TWEET_CHARS} characters"));
            }
            if !window.contains(tweet.created_at) {
                reasons.push("created_at outside the claim window".to_string());
            }
            report.filtered.push(Rejection::new(index, id, reasons));
            continue;
        }
        report.retained += 1;
        if tweet.geo.is_none() {
            if let Some(stored) = snapshot.tweet(&tweet.tweet_id) {
                if stored.raw_location == tweet.raw_location {
                    tweet.geo = stored.geo.clone();
                }
            }
        }
        if tweet.geo.is_none() {
            if let Some(raw) = tweet.raw_location.clone() {
                match normalize_location(&raw, ctx.resolver, &mut cache, ctx.clock, ctx.limiter) {
                    Ok(result) => {
                        if result.resolved.is_some() {
                            report.geocoded += 1;
                        }
                        tweet.geo = result.resolved;
                    }
                    Err(GeocodeError::EmptyLocation) => {}
                    Err(GeocodeError::Resolver(e)) => report.geocode_failures.push(Rejection {
                        index,
                        id: Some(tweet.tweet_id.clone()),
                        reasons: vec![e.to_string()],
                        retryable: e.is_retryable(),
                    }),
                }
            }
        }
        tweets.push(tweet);
    }

    let new_pairs: Vec<ClaimTweetPair> = tweets
        .iter()
        .map(|t| ClaimTweetPair::unclassified(claim_id, &t.tweet_id))
        .filter(|p| snapshot.pair(&p.pair_id).is_none())
        .collect();
    let fresh: Vec<GeocodeResult> = cache.fresh.into_values().collect();
    drop(snapshot);
    store.put_records(RecordBatch::Geocodes(fresh))?;
    store.put_records(RecordBatch::Tweets(tweets))?;
    report.pairs_created = store.put_records(RecordBatch::Pairs(new_pairs))?;
    Ok(report)
}

/// Stores context documents for claims and tweets already in the store.
pub fn ingest_documents(
    store: &dyn Store,
    records: impl IntoIterator<Item = Result<Value, String>>,
) -> Result<DocumentIngestReport, IngestError> {
    let snapshot = store.snapshot();
    let mut report = DocumentIngestReport::default();
    let mut docs = Vec::new();
    for (i, record) in records.into_iter().enumerate() {
        report.received += 1;
        let index = i + 1;
        let value = match record {
            Ok(v) => v,
            Err(e) => {
                report.rejected.push(Rejection::new(index, None, vec![e]));
                continue;
            }
        };
        let id = value.get("doc_id").and_then(Value::as_str).map(str::to_string);
        let doc: ContextDocument = match serde_json::from_value(value) {
            Ok(d) => d,
            Err(e) => {
                report.rejected.push(Rejection::new(index, id, vec![e.to_string()]));
                continue;
            }
        };
        if let Err(e) = doc.validate() {
            report.rejected.push(Rejection::new(index, id, vec![e.to_string()]));
            continue;
        }
        let exists = match doc.subject_kind {
            SubjectKind::Claim => snapshot.claim(&doc.subject_id).is_some(),
            SubjectKind::Tweet => snapshot.tweet(&doc.subject_id).is_some(),
        };
        if !exists {
            report.rejected.push(Rejection::new(
                index,
                id,
                vec![format!("unknown {} {:?}", doc.subject_kind.as_str(), doc.subject_id)],
            ));
            continue;
        }
        docs.push(doc);
    }
    drop(snapshot);
    report.stored = store.put_records(RecordBatch::Documents(docs))?;
    Ok(report)
}

/// Retries location normalization for stored tweets that have location text
/// but no geography.
pub fn geocode_stored_tweets(store: &dyn Store, ctx: &IngestContext<'_>) -> Result<GeocodeReport, IngestError> {
    let snapshot = store.snapshot();
    let mut report = GeocodeReport::default();
    let mut cache = CacheOverlay {
        base: &snapshot,
        fresh: BTreeMap::new(),
    };
    let mut updated = Vec::new();
    for (i, tweet) in snapshot.tweets().enumerate() {
        let Some(raw) = tweet.raw_location.as_deref() else {
            continue;
        };
        if tweet.geo.is_some() || raw.trim().is_empty() {
            continue;
        }
        report.attempted += 1;
        match normalize_location(raw, ctx.resolver, &mut cache, ctx.clock, ctx.limiter) {
            Ok(result) => match result.resolved {
                Some(geo) => {
                    report.resolved += 1;
                    let mut t = tweet.clone();
                    t.geo = Some(geo);
                    updated.push(t);
                }
                None => report.unresolved += 1,
            },
            Err(GeocodeError::EmptyLocation) => {}
            Err(GeocodeError::Resolver(e)) => report.failures.push(Rejection {
                index: i + 1,
                id: Some(tweet.tweet_id.clone()),
                reasons: vec![e.to_string()],
                retryable: e.is_retryable(),
            }),
        }
    }
    let fresh: Vec<GeocodeResult> = cache.fresh.into_values().collect();
    drop(snapshot);
    store.put_records(RecordBatch::Geocodes(fresh))?;
    store.put_records(RecordBatch::Tweets(updated))?;
    Ok(report)
}
