//! Aggregates over a store snapshot: stance–verdict confusion metrics,
//! binary alignment reports, grouping by topic / state / leaning, city and
//! daily breakdowns and map marker clustering.
//!
//! Every function here is pure. Callers select pairs (usually with
//! [`Dataset::query_pairs`]) and turn them into [`Observation`]s.

mod alignment;
mod cluster;
mod confusion;
pub mod export;
pub mod fixtures;
mod grouping;
mod leaning;
mod series;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alignment::{alignment_report, AlignmentCounts, AlignmentReport};
pub use cluster::{cell_size, cluster_markers, Centroid, MarkerCluster, MarkerPoint, MAX_ZOOM};
pub use confusion::{confusion, stance_verdict_metrics, ConfusionCounts3x3, StanceVerdictMetrics};
pub use grouping::{city_breakdown, group_reports, CityStanceCounts, Dimension, ALL_GROUP};
pub use leaning::{leaning_of, Leaning};
pub use series::{daily_series, DailyBucket, DailyStanceSeries};

use crate::model::{ClaimTweetPair, StanceLabel, VerdictClass};
use crate::states::UsState;
use crate::store::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("pair {0:?} has no stance label")]
    Unclassified(String),
    #[error("zoom {0} is outside 0..={MAX_ZOOM}")]
    InvalidZoom(u8),
    #[error("coordinates out of range for pair {0:?}")]
    InvalidCoordinates(String),
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
}

/// Where a post was geolocated.
#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub latitude: f64,
    pub longitude: f64,
    pub city: Option<String>,
    pub state: Option<&'static UsState>,
    pub in_united_states: bool,
}

/// The fields of a pair, its claim and its tweet that aggregation reads.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub pair_id: String,
    pub claim_id: String,
    pub stance: Option<StanceLabel>,
    pub verdict_class: VerdictClass,
    pub topics: Vec<String>,
    /// UTC date of the tweet.
    pub date: NaiveDate,
    pub place: Option<Place>,
}

impl Observation {
    /// `None` when the pair's claim or tweet is not in `data`.
    pub fn of(data: &Dataset, pair: &ClaimTweetPair) -> Option<Self> {
        let claim = data.claim(&pair.claim_id)?;
        let tweet = data.tweet(&pair.tweet_id)?;
        Some(Observation {
            pair_id: pair.pair_id.clone(),
            claim_id: pair.claim_id.clone(),
            stance: pair.stance,
            verdict_class: claim.verdict_class(),
            topics: claim.topics.iter().cloned().collect(),
            date: tweet.created_at.date_naive(),
            place: tweet.geo.as_ref().map(|g| Place {
                latitude: g.latitude,
                longitude: g.longitude,
                city: g.city.clone(),
                state: g.us_state(),
                in_united_states: g.in_united_states(),
            }),
        })
    }
}

pub fn observations<'a>(data: &Dataset, pairs: impl IntoIterator<Item = &'a ClaimTweetPair>) -> Vec<Observation> {
    pairs.into_iter().filter_map(|p| Observation::of(data, p)).collect()
}

/// Pair counts per stance label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceCounts {
    pub positive: u64,
    pub neutral: u64,
    pub negative: u64,
}

impl StanceCounts {
    pub fn add(&mut self, label: StanceLabel) {
        *self.get_mut(label) += 1;
    }

    pub fn get(&self, label: StanceLabel) -> u64 {
        match label {
            StanceLabel::Positive => self.positive,
            StanceLabel::NeutralNoStance => self.neutral,
            StanceLabel::Negative => self.negative,
        }
    }

    fn get_mut(&mut self, label: StanceLabel) -> &mut u64 {
        match label {
            StanceLabel::Positive => &mut self.positive,
            StanceLabel::NeutralNoStance => &mut self.neutral,
            StanceLabel::Negative => &mut self.negative,
        }
    }

    pub fn total(&self) -> u64 {
        self.positive + self.neutral + self.negative
    }
}

fn pct(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64 * 100.0)
}

/// Harmonic mean of two percentages; absent when either is.
fn f1(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    let (p, r) = (precision?, recall?);
    Some(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

fn is_us(place: &Place) -> bool {
    place.in_united_states || place.state.is_some()
}

