//! Truthfulness-stance mapping: ingest fact-checked claims and social posts,
//! classify each post's stance toward a claim's veracity through pluggable
//! retrieval-augmented providers, and aggregate the results by topic, region
//! and time.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`model`]: claims, tweets, pairs, verdicts and stance labels.
//! - [`ingestion`]: keyword queries, time windows, the noise filter and
//!   location normalization.
//! - [`pipeline`]: context retrieval, stance analysis and classification.
//! - [`analytics`]: verdict-alignment metrics, grouped reports, time series
//!   and marker clustering.
//! - [`store`]: in-memory and single-file persistence with indexed reads.

pub mod analytics;
pub mod clock;
pub mod ingestion;
pub mod model;
pub mod pipeline;
pub mod rate;
pub mod states;
pub mod store;

pub use model::{
    aligned, map_verdict, stance_in_range, Claim, ClaimTweetPair, GeoLocation, StanceDistribution, StanceLabel,
    Tweet, Verdict, VerdictClass,
};
