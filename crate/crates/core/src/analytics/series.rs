use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Observation, StanceCounts};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyBucket {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub counts: StanceCounts,
}

/// Consecutive days from the first to the last classified observation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DailyStanceSeries {
    pub buckets: Vec<DailyBucket>,
}

impl DailyStanceSeries {
    pub fn total(&self) -> u64 {
        self.buckets.iter().map(|b| b.counts.total()).sum()
    }
}

/// Daily stance counts by UTC date, gap days included with zero counts.
/// Unclassified observations are not counted.
pub fn daily_series<'a>(observations: impl IntoIterator<Item = &'a Observation>) -> DailyStanceSeries {
    let mut days: BTreeMap<NaiveDate, StanceCounts> = BTreeMap::new();
    for o in observations {
        if let Some(stance) = o.stance {
            days.entry(o.date).or_default().add(stance);
        }
    }
    let (Some(&first), Some(&last)) = (days.keys().next(), days.keys().next_back()) else {
        return DailyStanceSeries::default();
    };
    let buckets = first
        .iter_days()
        .take_while(|d| *d <= last)
        .map(|date| DailyBucket {
            date,
            counts: days.get(&date).copied().unwrap_or_default(),
        })
        .collect();
    DailyStanceSeries { buckets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StanceLabel, VerdictClass};

    fn obs(day: u32, stance: StanceLabel) -> Observation {
        Observation {
            pair_id: format!("p{day}{stance:?}"),
            claim_id: "c".into(),
            stance: Some(stance),
            verdict_class: VerdictClass::Truth,
            topics: vec![],
            date: NaiveDate::from_ymd_opt(2024, 2, day).unwrap(),
            place: None,
        }
    }

    #[test]
    fn single_bucket() {
        let o = [obs(1, StanceLabel::Positive), obs(1, StanceLabel::Positive), obs(1, StanceLabel::Negative)];
        let s = daily_series(&o);
        assert_eq!(s.buckets.len(), 1);
        assert_eq!(s.buckets[0].counts, StanceCounts {
            positive: 2,
            neutral: 0,
            negative: 1
        });
    }

    #[test]
    fn gaps_are_zero_filled() {
        let s = daily_series(&[obs(1, StanceLabel::Positive), obs(3, StanceLabel::Negative)]);
        assert_eq!(s.buckets.len(), 3);
        assert_eq!(s.buckets[1].counts.total(), 0);
        assert_eq!(s.total(), 2);
        assert!(daily_series(&[]).buckets.is_empty());
    }

    #[test]
    fn serializes_as_flat_rows() {
        let s = daily_series(&[obs(1, StanceLabel::NeutralNoStance)]);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"[{"date":"2024-02-01","positive":0,"neutral":1,"negative":0}]"#
        );
    }
}
