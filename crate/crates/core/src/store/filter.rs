use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::model::{normalize_topic, StanceLabel};
use crate::states::normalize_state;

/// Conjunctive filter over claim-tweet pairs. Absent fields do not restrict.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairFilter {
    /// Pair matches when its claim carries any of these topics.
    pub topics: Option<BTreeSet<String>>,
    pub claim_ids: Option<BTreeSet<String>>,
    /// State name or USPS code of the tweet's location.
    pub state: Option<String>,
    /// Inclusive range on the stance spectrum; unclassified pairs never match.
    pub stance_range: Option<(StanceLabel, StanceLabel)>,
    /// Inclusive bounds on the tweet's UTC creation date.
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
}

impl PairFilter {
    pub fn with_topics(mut self, topics: impl IntoIterator<Item = impl AsRef<str>>) -> Self {
        self.topics = Some(topics.into_iter().map(|t| normalize_topic(t.as_ref())).collect());
        self
    }

    pub fn with_claims(mut self, ids: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.claim_ids = Some(ids.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_state(mut self, state: impl Into<String>) -> Self {
        self.state = Some(state.into());
        self
    }

    pub fn with_stance_range(mut self, low: StanceLabel, high: StanceLabel) -> Self {
        self.stance_range = Some((low, high));
        self
    }

    pub fn with_dates(mut self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        self.date_from = from;
        self.date_to = to;
        self
    }

    /// Rejects malformed filters before any evaluation.
    pub fn validate(&self) -> Result<(), StoreError> {
        if let Some((low, high)) = self.stance_range {
            if low > high {
                return Err(StoreError::InvalidFilter(format!("stance range {low}..{high} is inverted")));
            }
        }
        if let (Some(from), Some(to)) = (self.date_from, self.date_to) {
            if from > to {
                return Err(StoreError::InvalidFilter(format!("date range {from}..{to} is inverted")));
            }
        }
        if let Some(state) = &self.state {
            if normalize_state(state).is_none() {
                return Err(StoreError::InvalidFilter(format!("unknown state {state:?}")));
            }
        }
        Ok(())
    }

    /// USPS code of the state filter, if any.
    pub(crate) fn state_code(&self) -> Option<&'static str> {
        self.state.as_deref().and_then(normalize_state).map(|s| s.code)
    }

    pub(crate) fn normalized_topics(&self) -> Option<BTreeSet<String>> {
        self.topics
            .as_ref()
            .map(|ts| ts.iter().map(|t| normalize_topic(t)).collect())
    }
}
