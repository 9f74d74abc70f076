//! Shared domain vocabulary: claims, tweets, claim-tweet pairs, verdicts,
//! stances and geography.
//!
//! Every type here is an immutable value record. Records serialize to one
//! JSON object per line with field names matching the struct fields and
//! timestamps in RFC 3339.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance on the sum of a [`StanceDistribution`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown verdict {0:?}")]
    UnknownVerdict(String),
    #[error("unknown stance label {0:?}")]
    UnknownStance(String),
    #[error("invalid stance range: {low} > {high}")]
    InvalidStanceRange { low: StanceLabel, high: StanceLabel },
    #[error("invalid stance distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid {record} record {id:?}: {reason}")]
    InvalidRecord {
        record: &'static str,
        id: String,
        reason: String,
    },
}

/// The six-level fact-check rating scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    True,
    MostlyTrue,
    HalfTrue,
    MostlyFalse,
    False,
    PantsOnFire,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::True,
        Verdict::MostlyTrue,
        Verdict::HalfTrue,
        Verdict::MostlyFalse,
        Verdict::False,
        Verdict::PantsOnFire,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "True",
            Verdict::MostlyTrue => "Mostly True",
            Verdict::HalfTrue => "Half True",
            Verdict::MostlyFalse => "Mostly False",
            Verdict::False => "False",
            Verdict::PantsOnFire => "Pants on Fire",
        }
    }

    /// Collapses the six-level verdict into its veracity class.
    pub fn class(self) -> VerdictClass {
        map_verdict(self)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = ModelError;

    /// Case-insensitive; punctuation and separators are ignored, so
    /// `"pants-fire"`, `"Pants on Fire!"` and `"PANTS_ON_FIRE"` all parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<String> = s
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(|w| w.to_lowercase())
            .collect();
        let words: Vec<&str> = words.iter().map(String::as_str).collect();
        let verdict = match words.as_slice() {
            ["true"] => Verdict::True,
            ["mostly", "true"] => Verdict::MostlyTrue,
            ["half", "true"] => Verdict::HalfTrue,
            // Older fact-check records use "Barely True" for the same rung.
            ["mostly", "false"] | ["barely", "true"] => Verdict::MostlyFalse,
            ["false"] => Verdict::False,
            ["pants", "on", "fire"] | ["pants", "fire"] => Verdict::PantsOnFire,
            _ => return Err(ModelError::UnknownVerdict(s.to_string())),
        };
        Ok(verdict)
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Veracity class a verdict collapses to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    Truth,
    Mixed,
    Misinfo,
}

impl VerdictClass {
    pub const ALL: [VerdictClass; 3] = [VerdictClass::Truth, VerdictClass::Mixed, VerdictClass::Misinfo];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictClass::Truth => "Truth",
            VerdictClass::Mixed => "Mixed",
            VerdictClass::Misinfo => "Misinfo",
        }
    }

    /// The stance that counts as aligned with this class.
    pub fn aligned_stance(self) -> StanceLabel {
        match self {
            VerdictClass::Truth => StanceLabel::Positive,
            VerdictClass::Mixed => StanceLabel::NeutralNoStance,
            VerdictClass::Misinfo => StanceLabel::Negative,
        }
    }
}

impl fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn map_verdict(verdict: Verdict) -> VerdictClass {
    match verdict {
        Verdict::True | Verdict::MostlyTrue => VerdictClass::Truth,
        Verdict::HalfTrue => VerdictClass::Mixed,
        Verdict::MostlyFalse | Verdict::False | Verdict::PantsOnFire => VerdictClass::Misinfo,
    }
}

/// Truthfulness stance of a post toward a claim.
///
/// Declaration order is the slider spectrum: `Negative < NeutralNoStance < Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StanceLabel {
    #[serde(rename = "negative")]
    Negative,
    #[serde(rename = "neutral", alias = "neutral_no_stance", alias = "no_stance")]
    NeutralNoStance,
    #[serde(rename = "positive")]
    Positive,
}

impl StanceLabel {
    /// All labels in ascending spectrum order.
    pub const ALL: [StanceLabel; 3] = [StanceLabel::Negative, StanceLabel::NeutralNoStance, StanceLabel::Positive];

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Negative => "negative",
            StanceLabel::NeutralNoStance => "neutral",
            StanceLabel::Positive => "positive",
        }
    }

    /// The verdict class this stance is aligned with.
    pub fn aligned_class(self) -> VerdictClass {
        match self {
            StanceLabel::Positive => VerdictClass::Truth,
            StanceLabel::NeutralNoStance => VerdictClass::Mixed,
            StanceLabel::Negative => VerdictClass::Misinfo,
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace(['-', ' '], "_").as_str() {
            "positive" | "pos" => Ok(StanceLabel::Positive),
            "neutral" | "neutral_no_stance" | "no_stance" | "neutral_no" => Ok(StanceLabel::NeutralNoStance),
            "negative" | "neg" => Ok(StanceLabel::Negative),
            _ => Err(ModelError::UnknownStance(s.to_string())),
        }
    }
}

/// True exactly for (Positive, Truth), (Negative, Misinfo) and (NeutralNoStance, Mixed).
pub fn aligned(stance: StanceLabel, class: VerdictClass) -> bool {
    stance.aligned_class() == class
}

/// Inclusive range check on the stance spectrum.
pub fn stance_in_range(stance: StanceLabel, low: StanceLabel, high: StanceLabel) -> Result<bool, ModelError> {
    if low > high {
        return Err(ModelError::InvalidStanceRange { low, high });
    }
    Ok(low <= stance && stance <= high)
}

/// Probabilities over the three stance categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct StanceDistribution {
    p_positive: f64,
    p_neutral: f64,
    p_negative: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    p_positive: f64,
    p_neutral: f64,
    p_negative: f64,
}

impl TryFrom<RawDistribution> for StanceDistribution {
    type Error = ModelError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        StanceDistribution::new(raw.p_positive, raw.p_neutral, raw.p_negative)
    }
}

impl StanceDistribution {
    pub fn new(p_positive: f64, p_neutral: f64, p_negative: f64) -> Result<Self, ModelError> {
        for (name, p) in [("p_positive", p_positive), ("p_neutral", p_neutral), ("p_negative", p_negative)] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(ModelError::InvalidDistribution(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        let sum = p_positive + p_neutral + p_negative;
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(ModelError::InvalidDistribution(format!("components sum to {sum}")));
        }
        Ok(StanceDistribution {
            p_positive,
            p_neutral,
            p_negative,
        })
    }

    /// Puts `dominant` mass on one label and splits the remainder evenly.
    pub fn peaked(label: StanceLabel, dominant: f64) -> Result<Self, ModelError> {
        let rest = (1.0 - dominant) / 2.0;
        match label {
            StanceLabel::Positive => Self::new(dominant, rest, rest),
            StanceLabel::NeutralNoStance => Self::new(rest, dominant, rest),
            StanceLabel::Negative => Self::new(rest, rest, dominant),
        }
    }

    pub fn p_positive(&self) -> f64 {
        self.p_positive
    }

    pub fn p_neutral(&self) -> f64 {
        self.p_neutral
    }

    pub fn p_negative(&self) -> f64 {
        self.p_negative
    }

    pub fn probability(&self, label: StanceLabel) -> f64 {
        match label {
            StanceLabel::Positive => self.p_positive,
            StanceLabel::NeutralNoStance => self.p_neutral,
            StanceLabel::Negative => self.p_negative,
        }
    }

    /// Argmax label. Exact ties resolve to `NeutralNoStance` when it is among
    /// the maxima, otherwise to the lower label in spectrum order.
    pub fn label(&self) -> StanceLabel {
        let max = self.p_positive.max(self.p_neutral).max(self.p_negative);
        if self.p_neutral == max {
            return StanceLabel::NeutralNoStance;
        }
        StanceLabel::ALL
            .into_iter()
            .find(|&l| self.probability(l) == max)
            .expect("one component equals the maximum")
    }
}

/// Lowercases and trims a topic string.
pub fn normalize_topic(topic: &str) -> String {
    topic.trim().to_lowercase()
}

/// A fact-checked statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: String,
    pub text: String,
    pub topics: BTreeSet<String>,
    pub verdict: Verdict,
    pub published_at: NaiveDate,
    #[serde(default)]
    pub source_url: Option<String>,
}

impl Claim {
    pub fn new(
        claim_id: impl Into<String>,
        text: impl Into<String>,
        topics: impl IntoIterator<Item = impl AsRef<str>>,
        verdict: Verdict,
        published_at: NaiveDate,
    ) -> Result<Self, ModelError> {
        let claim = Claim {
            claim_id: claim_id.into(),
            text: text.into(),
            topics: topics.into_iter().map(|t| normalize_topic(t.as_ref())).collect(),
            verdict,
            published_at,
            source_url: None,
        };
        claim.validate()?;
        Ok(claim)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| ModelError::InvalidRecord {
            record: "claim",
            id: self.claim_id.clone(),
            reason: reason.to_string(),
        };
        if self.claim_id.trim().is_empty() {
            return Err(fail("empty claim_id"));
        }
        if self.text.trim().is_empty() {
            return Err(fail("empty text"));
        }
        if self.topics.iter().all(|t| t.is_empty()) {
            return Err(fail("empty topics"));
        }
        if self.topics.iter().any(|t| *t != normalize_topic(t) || t.is_empty()) {
            return Err(fail("topics must be trimmed, lowercase and non-empty"));
        }
        Ok(())
    }

    pub fn verdict_class(&self) -> VerdictClass {
        map_verdict(self.verdict)
    }
}

/// Structured geography for a post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub city: Option<String>,
    #[serde(default)]
    pub county: Option<String>,
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub country: Option<String>,
}

pub const UNITED_STATES: &str = "United States";

impl GeoLocation {
    pub fn validate(&self) -> Result<(), String> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(format!("latitude {} out of range", self.latitude));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(format!("longitude {} out of range", self.longitude));
        }
        if let Some(state) = &self.state {
            let us = self.country.as_deref().is_none_or(|c| c == UNITED_STATES);
            if us && crate::states::normalize_state(state).is_none() {
                return Err(format!("unrecognized US state {state:?}"));
            }
        }
        Ok(())
    }

    /// Canonical US state name, when the location is in the United States.
    pub fn us_state(&self) -> Option<&'static crate::states::UsState> {
        if self.country.as_deref().is_some_and(|c| c != UNITED_STATES) {
            return None;
        }
        self.state.as_deref().and_then(crate::states::normalize_state)
    }

    pub fn in_united_states(&self) -> bool {
        self.country.as_deref() == Some(UNITED_STATES) || self.us_state().is_some()
    }
}

/// A social post. Only an opaque id is kept, no author identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub tweet_id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub raw_location: Option<String>,
    #[serde(default)]
    pub geo: Option<GeoLocation>,
}

impl Tweet {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::InvalidRecord {
            record: "tweet",
            id: self.tweet_id.clone(),
            reason,
        };
        if self.tweet_id.trim().is_empty() {
            return Err(fail("empty tweet_id".into()));
        }
        if let Some(geo) = &self.geo {
            geo.validate().map_err(fail)?;
        }
        Ok(())
    }
}

/// The classification unit: one claim joined with one retrieved post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimTweetPair {
    pub pair_id: String,
    pub claim_id: String,
    pub tweet_id: String,
    #[serde(default)]
    pub stance: Option<StanceLabel>,
    #[serde(default)]
    pub distribution: Option<StanceDistribution>,
    #[serde(default)]
    pub analysis_text: Option<String>,
    #[serde(default)]
    pub claim_context: Option<String>,
    #[serde(default)]
    pub tweet_context: Option<String>,
    #[serde(default)]
    pub classified_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub provider_tag: Option<String>,
}

impl ClaimTweetPair {
    /// Pair ids are derived from their members so re-ingestion is idempotent.
    pub fn pair_id_for(claim_id: &str, tweet_id: &str) -> String {
        format!("{claim_id}::{tweet_id}")
    }

    pub fn unclassified(claim_id: &str, tweet_id: &str) -> Self {
        ClaimTweetPair {
            pair_id: Self::pair_id_for(claim_id, tweet_id),
            claim_id: claim_id.to_string(),
            tweet_id: tweet_id.to_string(),
            stance: None,
            distribution: None,
            analysis_text: None,
            claim_context: None,
            tweet_context: None,
            classified_at: None,
            provider_tag: None,
        }
    }

    pub fn is_classified(&self) -> bool {
        self.stance.is_some()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| ModelError::InvalidRecord {
            record: "pair",
            id: self.pair_id.clone(),
            reason: reason.to_string(),
        };
        if self.pair_id.trim().is_empty() {
            return Err(fail("empty pair_id"));
        }
        match (self.stance, self.distribution) {
            (None, None) => Ok(()),
            (Some(stance), Some(dist)) if dist.label() == stance => Ok(()),
            (Some(_), Some(_)) => Err(fail("stance is not the argmax of its distribution")),
            _ => Err(fail("stance and distribution must be present together")),
        }
    }
}
