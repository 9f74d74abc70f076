//! Free-text location normalization with a persistent cache.

use std::collections::BTreeMap;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::model::GeoLocation;
use crate::rate::RateLimiter;

/// Negative lookups are retried after this long.
pub const NEGATIVE_CACHE_TTL: chrono::Duration = chrono::Duration::days(30);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    /// The resolver could not be reached; the lookup may be retried.
    #[error("resolver transport failure: {0}")]
    Transport(String),
    #[error("resolver returned a malformed response: {0}")]
    Malformed(String),
}

impl ResolveError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ResolveError::Transport(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeocodeError {
    #[error("location text is empty")]
    EmptyLocation,
    #[error(transparent)]
    Resolver(#[from] ResolveError),
}

/// Turns location text into structured geography. `Ok(None)` is a definitive
/// non-match.
pub trait GeoResolver: Send + Sync {
    fn resolve(&self, text: &str) -> Result<Option<GeoLocation>, ResolveError>;
    fn tag(&self) -> &str;
}

/// Outcome of one normalization, cached by `query_text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeocodeResult {
    pub query_text: String,
    pub resolved: Option<GeoLocation>,
    pub resolver_tag: String,
    pub resolved_at: DateTime<Utc>,
}

pub trait GeocodeCache {
    fn get(&self, key: &str) -> Option<GeocodeResult>;
    fn put(&mut self, result: GeocodeResult);
}

impl GeocodeCache for BTreeMap<String, GeocodeResult> {
    fn get(&self, key: &str) -> Option<GeocodeResult> {
        BTreeMap::get(self, key).cloned()
    }

    fn put(&mut self, result: GeocodeResult) {
        self.insert(result.query_text.clone(), result);
    }
}

/// Cache key: trimmed, lowercased, whitespace collapsed.
pub fn cache_key(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn is_fresh(hit: &GeocodeResult, resolver: &dyn GeoResolver, now: DateTime<Utc>) -> bool {
    match hit.resolved {
        Some(_) => true,
        None => hit.resolver_tag == resolver.tag() && now - hit.resolved_at <= NEGATIVE_CACHE_TTL,
    }
}

/// Cache first, then the resolver. Both positive and negative outcomes are
/// cached; transport failures are not.
pub fn normalize_location(
    raw: &str,
    resolver: &dyn GeoResolver,
    cache: &mut dyn GeocodeCache,
    clock: &dyn Clock,
    limiter: Option<&RateLimiter>,
) -> Result<GeocodeResult, GeocodeError> {
    let key = cache_key(raw);
    if key.is_empty() {
        return Err(GeocodeError::EmptyLocation);
    }
    let now = clock.now();
    if let Some(hit) = cache.get(&key) {
        if is_fresh(&hit, resolver, now) {
            return Ok(hit);
        }
    }
    if let Some(limiter) = limiter {
        limiter.acquire();
    }
    let resolved = resolver.resolve(raw.trim())?;
    let result = GeocodeResult {
        query_text: key,
        resolved,
        resolver_tag: resolver.tag().to_string(),
        resolved_at: now,
    };
    cache.put(result.clone());
    Ok(result)
}

/// Resolver backed by an HTTP endpoint: `GET {url}?q=TEXT` answering with a
/// `GeoLocation` JSON object, or `null` for no match.
#[derive(Debug)]
pub struct RemoteResolver {
    url: String,
    credential: Option<String>,
    agent: ureq::Agent,
}

impl RemoteResolver {
    /// `credential_env` names the environment variable holding a bearer token.
    pub fn new(url: impl Into<String>, credential_env: Option<&str>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        RemoteResolver {
            url: url.into(),
            credential: credential_env.and_then(|name| std::env::var(name).ok()),
            agent,
        }
    }
}

impl GeoResolver for RemoteResolver {
    fn resolve(&self, text: &str) -> Result<Option<GeoLocation>, ResolveError> {
        let mut request = self.agent.get(&self.url).query("q", text);
        if let Some(token) = &self.credential {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request.call().map_err(|e| ResolveError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if status >= 500 || status == 429 {
            return Err(ResolveError::Transport(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(ResolveError::Malformed(format!("HTTP {status}")));
        }
        let location: Option<GeoLocation> = response
            .body_mut()
            .read_json()
            .map_err(|e| ResolveError::Malformed(e.to_string()))?;
        if let Some(loc) = &location {
            loc.validate().map_err(ResolveError::Malformed)?;
        }
        Ok(location)
    }

    fn tag(&self) -> &str {
        "remote"
    }
}
