//! Bundled offline gazetteer: the 50 states, DC, and the 300 most populous
//! US cities.

use std::sync::OnceLock;

use serde::Deserialize;

use super::geocode::{GeoResolver, ResolveError};
use crate::model::{GeoLocation, UNITED_STATES};
use crate::states::{normalize_state, state_by_code, UsState};

const GAZETTEER_CSV: &str = include_str!("../../data/gazetteer.csv");

/// Rough geographic center of the contiguous United States.
const US_CENTER: (f64, f64) = (39.83, -98.58);

const COUNTRY_ALIASES: [&str; 6] = ["usa", "us", "u s a", "united states", "united states of america", "america"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceKind {
    City,
    State,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GazetteerRow {
    pub name: String,
    pub kind: PlaceKind,
    pub state_code: String,
    pub latitude: f64,
    pub longitude: f64,
    pub country: String,
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    rows: Vec<GazetteerRow>,
}

impl Gazetteer {
    pub fn from_csv(data: &str) -> Result<Self, csv::Error> {
        let mut reader = csv::Reader::from_reader(data.as_bytes());
        let rows = reader.deserialize().collect::<Result<Vec<GazetteerRow>, _>>()?;
        Ok(Gazetteer { rows })
    }

    pub fn bundled() -> &'static Gazetteer {
        static G: OnceLock<Gazetteer> = OnceLock::new();
        G.get_or_init(|| Gazetteer::from_csv(GAZETTEER_CSV).expect("bundled gazetteer parses"))
    }

    pub fn rows(&self) -> &[GazetteerRow] {
        &self.rows
    }

    /// City rows are listed by descending population, so the first match of
    /// an ambiguous name is the most populous one.
    pub fn find_city(&self, name: &str, state: Option<&UsState>) -> Option<&GazetteerRow> {
        let key = simplify(name);
        self.rows.iter().find(|r| {
            r.kind == PlaceKind::City
                && state.is_none_or(|s| r.state_code == s.code)
                && (simplify(&r.name) == key || simplify(&r.name).strip_suffix(" city") == Some(key.as_str()))
        })
    }

    pub fn find_state(&self, state: &UsState) -> Option<&GazetteerRow> {
        self.rows
            .iter()
            .find(|r| r.kind == PlaceKind::State && r.state_code == state.code)
    }

    fn location(&self, row: &GazetteerRow) -> GeoLocation {
        let state = state_by_code(&row.state_code).map(|s| s.name.to_string());
        GeoLocation {
            latitude: row.latitude,
            longitude: row.longitude,
            city: (row.kind == PlaceKind::City).then(|| row.name.clone()),
            county: None,
            state,
            country: Some(row.country.clone()),
        }
    }

    /// Parses profile-style location text such as "Dallas, TX",
    /// "Austin Texas", "Florida, USA" or "NYC".
    pub fn lookup(&self, text: &str) -> Option<GeoLocation> {
        let mut segments: Vec<(String, String)> = text
            .split([',', '|', '/', ';', '\u{2022}'])
            .map(|s| (s.trim().to_string(), simplify(s)))
            .filter(|(_, key)| !key.is_empty())
            .collect();
        let before = segments.len();
        segments.retain(|(_, key)| !COUNTRY_ALIASES.contains(&key.as_str()));
        let had_country = segments.len() < before;

        if segments.len() >= 2 {
            let (_, city_key) = &segments[0];
            if let Some(state) = normalize_state(&segments[1].1) {
                if let Some(row) = self.find_city(city_key, Some(state)) {
                    return Some(self.location(row));
                }
                if let Some(row) = self.find_state(state) {
                    return Some(self.location(row));
                }
            }
        }
        for (original, key) in &segments {
            if let Some(loc) = self.lookup_segment(original, key) {
                return Some(loc);
            }
        }
        if segments.is_empty() && had_country {
            return Some(GeoLocation {
                latitude: US_CENTER.0,
                longitude: US_CENTER.1,
                city: None,
                county: None,
                state: None,
                country: Some(UNITED_STATES.to_string()),
            });
        }
        None
    }

    fn lookup_segment(&self, original: &str, key: &str) -> Option<GeoLocation> {
        // Two-letter codes stand alone only when written in capitals, so that
        // words like "in", "me" or "ok" do not read as states.
        let state_alone = if key.len() == 2 {
            original.len() == 2 && original.chars().all(|c| c.is_ascii_uppercase())
        } else {
            true
        };
        if state_alone {
            if let Some(row) = normalize_state(key).and_then(|s| self.find_state(s)) {
                return Some(self.location(row));
            }
        }
        if let Some(row) = self.find_city(key, None) {
            return Some(self.location(row));
        }
        match key {
            "nyc" => return self.find_city("new york city", None).map(|r| self.location(r)),
            "la" if original == "LA" => return self.find_city("los angeles", None).map(|r| self.location(r)),
            _ => {}
        }
        // "Austin Texas", "Dallas TX": trailing state words after a city name.
        let words: Vec<&str> = key.split(' ').collect();
        let original_words: Vec<&str> = original.split_whitespace().collect();
        for split in (1..words.len()).rev() {
            let tail = words[split..].join(" ");
            let tail_is_code = tail.len() == 2;
            if tail_is_code
                && !original_words
                    .last()
                    .is_some_and(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).chars().all(|c| c.is_ascii_uppercase()))
            {
                continue;
            }
            if let Some(state) = normalize_state(&tail) {
                let head = words[..split].join(" ");
                if let Some(row) = self.find_city(&head, Some(state)) {
                    return Some(self.location(row));
                }
            }
        }
        None
    }
}

/// Lowercase, drop punctuation, collapse whitespace.
fn simplify(text: &str) -> String {
    text.chars()
        .map(|c| if c == '-' { ' ' } else { c })
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Deterministic resolver over the bundled gazetteer.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineResolver;

impl GeoResolver for OfflineResolver {
    fn resolve(&self, text: &str) -> Result<Option<GeoLocation>, ResolveError> {
        Ok(Gazetteer::bundled().lookup(text))
    }

    fn tag(&self) -> &str {
        "offline-gazetteer"
    }
}
