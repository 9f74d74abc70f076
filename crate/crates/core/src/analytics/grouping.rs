use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::alignment::{AlignmentCounts, AlignmentReport};
use super::leaning::leaning_of;
use super::{is_us, AnalyticsError, Observation, StanceCounts};
use crate::model::UNITED_STATES;

pub const ALL_GROUP: &str = "All";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Topic,
    State,
    Leaning,
    CountryVsAll,
}

impl FromStr for Dimension {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "topic" => Ok(Dimension::Topic),
            "state" => Ok(Dimension::State),
            "leaning" => Ok(Dimension::Leaning),
            "country_vs_all" | "country" => Ok(Dimension::CountryVsAll),
            other => Err(AnalyticsError::UnknownDimension(other.to_string())),
        }
    }
}

/// Group keys an observation belongs to. Topics are non-exclusive.
fn keys(o: &Observation, dimension: Dimension) -> Vec<String> {
    let state = o.place.as_ref().and_then(|p| p.state);
    match dimension {
        Dimension::Topic => o.topics.clone(),
        Dimension::State => state.map(|s| s.name.to_string()).into_iter().collect(),
        Dimension::Leaning => state
            .and_then(|s| leaning_of(s.code))
            .map(|l| l.as_str().to_string())
            .into_iter()
            .collect(),
        Dimension::CountryVsAll => {
            let mut k = vec![ALL_GROUP.to_string()];
            if o.place.as_ref().is_some_and(is_us) {
                k.insert(0, UNITED_STATES.to_string());
            }
            k
        }
    }
}

/// One alignment report per group, for groups with at least one pair left
/// after the exclusions. Ordered by that pair count descending, ties by key;
/// `country_vs_all` is always "United States" then "All". `top_n` keeps the
/// first `n`.
pub fn group_reports<'a>(
    observations: impl IntoIterator<Item = &'a Observation>,
    dimension: Dimension,
    top_n: Option<usize>,
) -> Vec<AlignmentReport> {
    let mut groups: BTreeMap<String, AlignmentCounts> = BTreeMap::new();
    for o in observations {
        for key in keys(o, dimension) {
            let mut probe = AlignmentCounts::default();
            if probe.add(o) {
                groups.entry(key).or_default().add(o);
            }
        }
    }
    let mut reports: Vec<AlignmentReport> = groups
        .into_iter()
        .map(|(k, c)| AlignmentReport::from_counts(k, c))
        .collect();
    if dimension == Dimension::CountryVsAll {
        reports.sort_by_key(|r| r.group == ALL_GROUP);
    } else {
        reports.sort_by(|a, b| b.pair_count().cmp(&a.pair_count()).then_with(|| a.group.cmp(&b.group)));
    }
    if let Some(n) = top_n {
        reports.truncate(n);
    }
    reports
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityStanceCounts {
    pub city: String,
    /// Canonical state name, when known.
    pub state: Option<String>,
    #[serde(flatten)]
    pub counts: StanceCounts,
    pub total: u64,
}

/// Stance counts per city over classified, geolocated observations,
/// optionally restricted to one state (USPS code). Ordered by total
/// descending, then city and state name.
pub fn city_breakdown<'a>(
    observations: impl IntoIterator<Item = &'a Observation>,
    state_code: Option<&str>,
) -> Vec<CityStanceCounts> {
    let mut cities: BTreeMap<(String, Option<String>), StanceCounts> = BTreeMap::new();
    for o in observations {
        let (Some(stance), Some(place)) = (o.stance, o.place.as_ref()) else {
            continue;
        };
        let Some(city) = place.city.as_deref().map(str::trim).filter(|c| !c.is_empty()) else {
            continue;
        };
        if state_code.is_some_and(|code| place.state.map(|s| s.code) != Some(code)) {
            continue;
        }
        cities
            .entry((city.to_string(), place.state.map(|s| s.name.to_string())))
            .or_default()
            .add(stance);
    }
    let mut out: Vec<CityStanceCounts> = cities
        .into_iter()
        .map(|((city, state), counts)| CityStanceCounts {
            city,
            state,
            total: counts.total(),
            counts,
        })
        .collect();
    out.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.city.cmp(&b.city)).then_with(|| a.state.cmp(&b.state)));
    out
}
