//! TOML configuration merged with command-line overrides.
//!
//! Credentials never appear here: remote endpoints name the environment
//! variable that holds their bearer token, and unknown keys are rejected so a
//! token pasted into the file is refused rather than ignored.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::ValueEnum;
use serde::Deserialize;
use stancemap::ingestion::{GeoResolver, OfflineResolver, RemoteResolver};
use stancemap::pipeline::remote::{RemoteClassifier, RemoteEmbedder, RemoteGenerator, DEFAULT_TIMEOUT};
use stancemap::pipeline::{mock_providers, PipelineConfig, Providers};
use stancemap::rate::RateLimiter;

use crate::CliError;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ResolverKind {
    #[default]
    Offline,
    Remote,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub listen: Option<String>,
    pub provider: Option<ProviderKind>,
    pub concurrency: Option<usize>,
    /// Budget shared by every outbound provider and resolver call.
    pub requests_per_second: Option<f64>,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub remote: RemoteSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub chunk_chars: Option<usize>,
    pub overlap_chars: Option<usize>,
    pub top_k: Option<usize>,
    pub retry_attempts: Option<u32>,
    pub retry_backoff_secs: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSection {
    pub classifier_url: Option<String>,
    pub generator_url: Option<String>,
    pub embedder_url: Option<String>,
    pub embedding_dimension: Option<usize>,
    pub geocoder_url: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub credential_env: Option<String>,
    pub timeout_secs: Option<f64>,
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub store: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub concurrency: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub store: Option<PathBuf>,
    pub listen: String,
    pub provider: ProviderKind,
    pub concurrency: usize,
    pub requests_per_second: Option<f64>,
    pub pipeline: PipelineConfig,
    pub remote: RemoteSection,
}

impl CliConfig {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, CliError> {
        let file = match path {
            None => FileConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| config_error(p, &text, &e))?
            }
        };
        Self::resolve(file, overrides)
    }

    pub fn resolve(file: FileConfig, overrides: Overrides) -> Result<Self, CliError> {
        let defaults = PipelineConfig::default();
        let p = &file.pipeline;
        let mut pipeline = PipelineConfig {
            chunk_chars: p.chunk_chars.unwrap_or(defaults.chunk_chars),
            overlap_chars: p.overlap_chars.unwrap_or(defaults.overlap_chars),
            top_k: p.top_k.unwrap_or(defaults.top_k),
            retry: defaults.retry,
        };
        if let Some(n) = p.retry_attempts {
            pipeline.retry.attempts = n;
        }
        if let Some(secs) = p.retry_backoff_secs {
            pipeline.retry.initial_backoff = Duration::try_from_secs_f64(secs)
                .map_err(|_| CliError::Validation(format!("invalid retry_backoff_secs {secs}")))?;
        }
        pipeline.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        let concurrency = overrides.concurrency.or(file.concurrency).unwrap_or(4);
        if concurrency == 0 {
            return Err(CliError::Validation("concurrency must be at least 1".into()));
        }
        Ok(CliConfig {
            store: overrides.store.or(file.store),
            listen: file.listen.unwrap_or_else(|| DEFAULT_LISTEN.to_string()),
            provider: overrides.provider.or(file.provider).unwrap_or_default(),
            concurrency,
            requests_per_second: file.requests_per_second,
            pipeline,
            remote: file.remote,
        })
    }

    pub fn store_path(&self) -> Result<&Path, CliError> {
        self.store
            .as_deref()
            .ok_or_else(|| CliError::Validation("no store: pass --store or set `store` in the config".into()))
    }

    pub fn listen_addr(&self, flag: Option<&str>) -> Result<SocketAddr, CliError> {
        let text = flag.unwrap_or(&self.listen);
        text.parse()
            .map_err(|_| CliError::Validation(format!("invalid listen address {text:?}")))
    }

    fn timeout(&self) -> Result<Duration, CliError> {
        match self.remote.timeout_secs {
            None => Ok(DEFAULT_TIMEOUT),
            Some(s) => Duration::try_from_secs_f64(s)
                .ok()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| CliError::Validation(format!("invalid timeout_secs {s}"))),
        }
    }

    fn credential_env(&self) -> Option<&str> {
        self.remote.credential_env.as_deref()
    }

    /// The provider set for `classify`. Remote providers need every endpoint
    /// configured; the mock set needs nothing.
    pub fn providers(&self) -> Result<Providers, CliError> {
        let mut providers = match self.provider {
            ProviderKind::Mock => mock_providers(),
            ProviderKind::Remote => {
                let r = &self.remote;
                let need = |v: &Option<String>, key: &str| {
                    v.clone()
                        .ok_or_else(|| CliError::Validation(format!("remote provider requires remote.{key}")))
                };
                let classifier = need(&r.classifier_url, "classifier_url")?;
                let generator = need(&r.generator_url, "generator_url")?;
                let embedder = need(&r.embedder_url, "embedder_url")?;
                let dimension = r
                    .embedding_dimension
                    .filter(|d| *d > 0)
                    .ok_or_else(|| CliError::Validation("remote provider requires remote.embedding_dimension".into()))?;
                let timeout = self.timeout()?;
                let env = self.credential_env();
                Providers {
                    classifier: Arc::new(RemoteClassifier::new(&classifier, env, timeout)),
                    generator: Arc::new(RemoteGenerator::new(&generator, env, timeout)),
                    embedder: Arc::new(RemoteEmbedder::new(&embedder, env, dimension, timeout)),
                    limiter: Arc::new(RateLimiter::unlimited()),
                }
            }
        };
        providers.limiter = Arc::new(self.limiter());
        Ok(providers)
    }

    pub fn limiter(&self) -> RateLimiter {
        RateLimiter::new(self.requests_per_second)
    }

    pub fn resolver(&self, kind: ResolverKind) -> Result<Box<dyn GeoResolver>, CliError> {
        match kind {
            ResolverKind::Offline => Ok(Box::new(OfflineResolver)),
            ResolverKind::Remote => {
                let url = self
                    .remote
                    .geocoder_url
                    .as_deref()
                    .ok_or_else(|| CliError::Validation("remote resolver requires remote.geocoder_url".into()))?;
                Ok(Box::new(RemoteResolver::new(url, self.credential_env(), self.timeout()?)))
            }
        }
    }
}

/// Names the line and the problem but never echoes the file's contents,
/// which could contain a misplaced secret.
fn config_error(path: &Path, text: &str, e: &toml::de::Error) -> CliError {
    let at = e
        .span()
        .map(|span| format!(" at line {}", text[..span.start].matches('\n').count() + 1))
        .unwrap_or_default();
    CliError::Validation(format!("invalid config {}{at}: {}", path.display(), e.message().trim()))
}
