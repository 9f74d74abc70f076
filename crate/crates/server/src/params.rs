//! Query-string parsing. Keys may repeat only where a list is expected;
//! unknown keys are rejected so that typos do not silently widen a filter.

use std::collections::BTreeSet;
use std::str::FromStr;

use chrono::NaiveDate;
use stancemap::store::PairFilter;
use stancemap::StanceLabel;

use crate::error::ApiError;

pub const DEFAULT_LIMIT: usize = 100;
pub const MAX_LIMIT: usize = 1000;

const FILTER_KEYS: [&str; 7] = ["topics", "claim_ids", "state", "stance_min", "stance_max", "date_from", "date_to"];
const PAGE_KEYS: [&str; 2] = ["cursor", "limit"];

#[derive(Debug, Default)]
pub struct Params {
    pairs: Vec<(String, String)>,
}

impl Params {
    pub fn parse(query: Option<&str>) -> Self {
        let pairs = form_urlencoded::parse(query.unwrap_or_default().as_bytes())
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect();
        Params { pairs }
    }

    /// Fails on keys outside `allowed` (filter and paging keys are added by
    /// the flags).
    pub fn allow(&self, allowed: &[&str], filters: bool, paging: bool) -> Result<(), ApiError> {
        for (k, _) in &self.pairs {
            let known = allowed.contains(&k.as_str())
                || (filters && FILTER_KEYS.contains(&k.as_str()))
                || (paging && PAGE_KEYS.contains(&k.as_str()));
            if !known {
                return Err(ApiError::BadRequest(format!("unknown query parameter {k:?}")));
            }
        }
        Ok(())
    }

    pub fn many(&self, key: &str) -> Vec<&str> {
        self.pairs.iter().filter(|(k, _)| k == key).map(|(_, v)| v.as_str()).collect()
    }

    pub fn one(&self, key: &str) -> Result<Option<&str>, ApiError> {
        match self.many(key).as_slice() {
            [] => Ok(None),
            [v] => Ok(Some(v)),
            _ => Err(ApiError::BadRequest(format!("parameter {key:?} given more than once"))),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ApiError> {
        self.one(key)?
            .map(|v| {
                v.parse()
                    .map_err(|_| ApiError::BadRequest(format!("invalid value {v:?} for {key:?}")))
            })
            .transpose()
    }

    /// The pair filter described by `topics`, `claim_ids`, `state`,
    /// `stance_min`, `stance_max`, `date_from` and `date_to`. A single stance
    /// bound leaves the other end of the spectrum open.
    pub fn filter(&self) -> Result<PairFilter, ApiError> {
        let mut filter = PairFilter::default();
        let topics = self.many("topics");
        if !topics.is_empty() {
            filter = filter.with_topics(topics);
        }
        let claims = self.many("claim_ids");
        if !claims.is_empty() {
            filter = filter.with_claims(claims.into_iter().map(String::from).collect::<BTreeSet<_>>());
        }
        if let Some(state) = self.one("state")? {
            filter = filter.with_state(state);
        }
        let low: Option<StanceLabel> = self.parsed("stance_min")?;
        let high: Option<StanceLabel> = self.parsed("stance_max")?;
        if low.is_some() || high.is_some() {
            filter = filter.with_stance_range(
                low.unwrap_or(StanceLabel::Negative),
                high.unwrap_or(StanceLabel::Positive),
            );
        }
        let from: Option<NaiveDate> = self.parsed("date_from")?;
        let to: Option<NaiveDate> = self.parsed("date_to")?;
        filter = filter.with_dates(from, to);
        filter.validate()?;
        Ok(filter)
    }

    pub fn page(&self) -> Result<Page, ApiError> {
        let offset = match self.one("cursor")? {
            None => 0,
            Some(c) => c
                .parse()
                .map_err(|_| ApiError::BadRequest(format!("invalid cursor {c:?}")))?,
        };
        let limit = self.parsed::<usize>("limit")?.unwrap_or(DEFAULT_LIMIT);
        if limit == 0 || limit > MAX_LIMIT {
            return Err(ApiError::BadRequest(format!("limit must be in 1..={MAX_LIMIT}")));
        }
        Ok(Page { offset, limit })
    }
}

/// Offset pagination. The cursor is the offset of the next item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Page {
    pub offset: usize,
    pub limit: usize,
}

impl Page {
    /// The items of this page and the cursor of the next one.
    pub fn apply<T>(self, items: Vec<T>) -> (Vec<T>, Option<String>) {
        let total = items.len();
        let end = self.offset.saturating_add(self.limit).min(total);
        let next = (end < total).then(|| end.to_string());
        let page = items.into_iter().skip(self.offset).take(end.saturating_sub(self.offset)).collect();
        (page, next)
    }
}

/// `min_lon,min_lat,max_lon,max_lat` in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub const WORLD: BBox = BBox {
        min_lon: -180.0,
        min_lat: -90.0,
        max_lon: 180.0,
        max_lat: 90.0,
    };

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }
}

impl FromStr for BBox {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bbox value {p:?} is not a number")))
            .collect::<Result<_, _>>()?;
        let [min_lon, min_lat, max_lon, max_lat] = parts[..] else {
            return Err("bbox needs min_lon,min_lat,max_lon,max_lat".into());
        };
        let lon_ok = |x: f64| (-180.0..=180.0).contains(&x);
        let lat_ok = |x: f64| (-90.0..=90.0).contains(&x);
        if !(lon_ok(min_lon) && lon_ok(max_lon) && lat_ok(min_lat) && lat_ok(max_lat)) {
            return Err("bbox coordinates out of range".into());
        }
        if min_lon > max_lon || min_lat > max_lat {
            return Err("bbox minimum exceeds maximum".into());
        }
        Ok(BBox {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_lists_and_single_values() {
        let p = Params::parse(Some("topics=health&topics=Crime&state=wa&stance_min=neutral"));
        let f = p.filter().unwrap();
        assert_eq!(f.topics.unwrap().into_iter().collect::<Vec<_>>(), ["crime", "health"]);
        assert_eq!(f.stance_range, Some((StanceLabel::NeutralNoStance, StanceLabel::Positive)));
        assert!(Params::parse(Some("state=WA&state=TX")).filter().is_err());
    }

    #[test]
    fn rejects_malformed_filters() {
        for q in [
            "stance_min=positive&stance_max=negative",
            "date_from=2024-02-01&date_to=2024-01-01",
            "date_from=yesterday",
            "state=Atlantis",
            "stance_max=angry",
        ] {
            assert!(Params::parse(Some(q)).filter().is_err(), "{q}");
        }
    }

    #[test]
    fn unknown_keys() {
        let p = Params::parse(Some("zoom=3&topic=health"));
        assert!(p.allow(&["zoom"], true, true).is_err());
        assert!(Params::parse(Some("zoom=3&limit=5")).allow(&["zoom"], false, true).is_ok());
    }

    #[test]
    fn pages() {
        let p = Page { offset: 0, limit: 2 };
        assert_eq!(p.apply(vec![1, 2, 3]), (vec![1, 2], Some("2".into())));
        assert_eq!(Page { offset: 2, limit: 2 }.apply(vec![1, 2, 3]), (vec![3], None));
        assert_eq!(Page { offset: 9, limit: 2 }.apply(vec![1, 2, 3]), (vec![], None));
        assert!(Params::parse(Some("limit=1001")).page().is_err());
        assert!(Params::parse(Some("limit=0")).page().is_err());
        assert!(Params::parse(Some("cursor=abc")).page().is_err());
        assert_eq!(Params::parse(None).page().unwrap(), Page { offset: 0, limit: DEFAULT_LIMIT });
    }

    #[test]
    fn bbox_parsing() {
        let b: BBox = "-125,24,-66,50".parse().unwrap();
        assert!(b.contains(47.6, -122.3));
        assert!(!b.contains(51.5, -0.1));
        for bad in ["1,2,3", "a,b,c,d", "10,0,-10,5", "0,-91,1,1"] {
            assert!(bad.parse::<BBox>().is_err(), "{bad}");
        }
    }
}
