use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::keywords::KeywordExtractor;
use super::window::compute_time_window;
use super::IngestError;
use crate::model::Claim;

/// Radius search operator appended to a platform query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeocodeOperator {
    pub latitude: f64,
    pub longitude: f64,
    pub radius_km: f64,
}

/// A keyword retrieval query for one claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub keywords: Vec<String>,
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
    pub geocode: Option<GeocodeOperator>,
}

impl QuerySpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.keywords.is_empty() || self.keywords.iter().any(|k| k.is_empty()) {
            return Err(IngestError::InvalidQuery("keywords must be non-empty".into()));
        }
        if self.window_start >= self.window_end {
            return Err(IngestError::InvalidQuery("window_start must precede window_end".into()));
        }
        if let Some(g) = self.geocode {
            if !(-90.0..=90.0).contains(&g.latitude) || !(-180.0..=180.0).contains(&g.longitude) {
                return Err(IngestError::InvalidQuery("geocode coordinates out of range".into()));
            }
            if g.radius_km.is_nan() || g.radius_km <= 0.0 {
                return Err(IngestError::InvalidQuery("geocode radius must be positive".into()));
            }
        }
        Ok(())
    }

    /// `kw1 kw2 ... geocode:LAT,LON,RADIUSkm`, with the geocode segment omitted
    /// when absent.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.keywords.join(" "))?;
        if let Some(g) = self.geocode {
            write!(f, " geocode:{},{},{}km", g.latitude, g.longitude, g.radius_km)?;
        }
        Ok(())
    }
}

pub fn build_query(
    claim: &Claim,
    geocode: Option<GeocodeOperator>,
    extractor: &dyn KeywordExtractor,
) -> Result<QuerySpec, IngestError> {
    let keywords = extractor.extract(&claim.text)?;
    let window = compute_time_window(claim.published_at);
    let spec = QuerySpec {
        keywords,
        window_start: window.start,
        window_end: window.end,
        geocode,
    };
    spec.validate()?;
    Ok(spec)
}
