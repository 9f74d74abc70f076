//! Published count tables bundled as JSONL, and a helper that turns a
//! confusion matrix into store records.
//!
//! `stance_verdict_counts.jsonl` has one `{stance, verdict_class, count}`
//! line per cell. `alignment_counts.jsonl` has one
//! `{table, group, truth_pos, truth_neg, misinfo_pos, misinfo_neg}` line per
//! row, with `table` one of `topic`, `state`, `leaning`.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::alignment::AlignmentCounts;
use super::confusion::ConfusionCounts3x3;
use crate::model::{Claim, ClaimTweetPair, StanceDistribution, StanceLabel, Tweet, Verdict, VerdictClass};
use crate::store::RecordBatch;

pub const STANCE_VERDICT_COUNTS: &str = include_str!("../../fixtures/stance_verdict_counts.jsonl");
pub const ALIGNMENT_COUNTS: &str = include_str!("../../fixtures/alignment_counts.jsonl");

#[derive(Debug, Error)]
#[error("fixture line {line}: {source}")]
pub struct FixtureError {
    pub line: usize,
    #[source]
    pub source: serde_json::Error,
}

#[derive(Debug, Deserialize)]
struct Cell {
    stance: StanceLabel,
    verdict_class: VerdictClass,
    count: u64,
}

fn lines<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, FixtureError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| FixtureError { line: i + 1, source }))
        .collect()
}

/// Cells listed more than once are summed.
pub fn parse_confusion(text: &str) -> Result<ConfusionCounts3x3, FixtureError> {
    let mut m = ConfusionCounts3x3::default();
    for c in lines::<Cell>(text)? {
        m.add(c.stance, c.verdict_class, c.count);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentFixtureRow {
    pub table: String,
    pub group: String,
    #[serde(flatten)]
    pub counts: AlignmentCounts,
}

pub fn parse_alignment_rows(text: &str) -> Result<Vec<AlignmentFixtureRow>, FixtureError> {
    lines(text)
}

/// Claims, tweets and classified pairs whose confusion matrix is `m`. There
/// is one claim per verdict class (`fixture-truth`, `fixture-mixed` and
/// `fixture-misinfo`, rated True, Half True and False, topic
/// `fixture`); tweets are spread over 30 days from `start`.
pub fn materialize_confusion(m: &ConfusionCounts3x3, start: NaiveDate) -> Vec<RecordBatch> {
    let verdicts = [
        (VerdictClass::Truth, Verdict::True),
        (VerdictClass::Mixed, Verdict::HalfTrue),
        (VerdictClass::Misinfo, Verdict::False),
    ];
    let claims: Vec<Claim> = verdicts
        .iter()
        .map(|(class, verdict)| {
            Claim::new(
                format!("fixture-{}", class.as_str().to_lowercase()),
                format!("Fixture claim rated {}", verdict.as_str()),
                ["fixture"],
                *verdict,
                start,
            )
            .expect("fixture claim is valid")
        })
        .collect();
    let mut tweets = Vec::new();
    let mut pairs = Vec::new();
    let noon = start.and_hms_opt(12, 0, 0).expect("valid time").and_utc();
    for stance in ConfusionCounts3x3::rows() {
        let distribution = StanceDistribution::peaked(stance, 0.8).expect("valid distribution");
        for (class, _) in verdicts {
            for _ in 0..m.get(stance, class) {
                let n = tweets.len();
                let tweet = Tweet {
                    tweet_id: format!("fixture-t{n:07}"),
                    text: format!("fixture post {n} discussing the claim at length"),
                    created_at: noon + Duration::days((n % 30) as i64),
                    raw_location: None,
                    geo: None,
                };
                let mut pair = ClaimTweetPair::unclassified(&format!("fixture-{}", class.as_str().to_lowercase()), &tweet.tweet_id);
                pair.stance = Some(stance);
                pair.distribution = Some(distribution);
                tweets.push(tweet);
                pairs.push(pair);
            }
        }
    }
    vec![RecordBatch::Claims(claims), RecordBatch::Tweets(tweets), RecordBatch::Pairs(pairs)]
}
