//! Loading claims and posts: retrieval queries, collection windows, the
//! length filter and location normalization.

pub mod gazetteer;
pub mod geocode;
mod ingest;
pub mod keywords;
pub mod query;
pub mod window;

use thiserror::Error;

pub use gazetteer::{Gazetteer, OfflineResolver};
pub use geocode::{normalize_location, GeoResolver, GeocodeError, GeocodeResult, RemoteResolver, ResolveError};
pub use ingest::{
    geocode_stored_tweets, ingest_claims, ingest_documents, ingest_tweets, read_jsonl, ClaimIngestReport,
    DocumentIngestReport, GeocodeReport, IngestContext, Rejection, TweetIngestReport,
};
pub use keywords::{extract_keywords, tokenize, KeywordExtractor, StopwordExtractor};
pub use query::{build_query, GeocodeOperator, QuerySpec};
pub use window::{compute_time_window, TimeWindow};

use crate::model::Tweet;
use crate::store::StoreError;

/// Posts shorter than this many characters are dropped as noise.
pub const MIN_TWEET_CHARS: usize = 30;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("claim text yields no usable keywords: {0:?}")]
    UnusableClaimText(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unknown claim {0:?}")]
    UnknownClaim(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Keeps a post when it has at least [`MIN_TWEET_CHARS`] Unicode scalar
/// values and was created inside the claim's window.
pub fn filter_tweet(tweet: &Tweet, window: &TimeWindow) -> bool {
    tweet.text.chars().count() >= MIN_TWEET_CHARS && window.contains(tweet.created_at)
}
