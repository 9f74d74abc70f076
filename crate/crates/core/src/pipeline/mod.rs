//! Retrieval-augmented stance classification.
//!
//! For each claim-tweet pair the pipeline
//!
//! 1. chunks the context documents registered for the claim and for the
//!    tweet, ranks chunks by cosine similarity to the subject text and asks a
//!    [`TextGenerator`] to summarize the top `k`;
//! 2. asks the generator for a stance analysis of the tweet given the claim
//!    and both summaries;
//! 3. hands claim, analysis and summaries (never the raw tweet) to a
//!    [`StanceClassifier`] and labels the pair with the argmax of the
//!    returned distribution.
//!
//! Providers are traits so that hosted models ([`remote`]) and the
//! deterministic offline set ([`mock`]) are interchangeable.

mod analysis;
mod batch;
mod chunk;
mod classify;
pub mod mock;
pub mod remote;
mod retrieve;
pub mod templates;

use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::generate_stance_analysis;
pub use batch::{run_batch, BatchOptions, BatchReport, PairFailure};
pub use chunk::{chunk_document, Chunk};
pub use classify::{apply_result, classify_pair, PairContext};
pub use mock::mock_providers;
pub use retrieve::{cosine_similarity, retrieve_context, Subject};

use crate::model::{ModelError, StanceDistribution, StanceLabel};
use crate::rate::RateLimiter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectKind {
    Claim,
    Tweet,
}

impl SubjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SubjectKind::Claim => "claim",
            SubjectKind::Tweet => "tweet",
        }
    }
}

/// Background text attached to a claim (e.g. the fact-check article) or a
/// tweet (e.g. a linked page).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextDocument {
    pub doc_id: String,
    pub subject_kind: SubjectKind,
    pub subject_id: String,
    pub text: String,
    pub source_tag: String,
}

impl ContextDocument {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| ModelError::InvalidRecord {
            record: "document",
            id: self.doc_id.clone(),
            reason: reason.to_string(),
        };
        if self.doc_id.trim().is_empty() {
            return Err(fail("empty doc_id"));
        }
        if self.text.trim().is_empty() {
            return Err(fail("empty text"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSummary {
    pub subject_kind: SubjectKind,
    pub subject_id: String,
    /// Empty when no chunks were retrieved.
    pub summary_text: String,
    /// `doc_id#ordinal` of the selected chunks, best first.
    pub supporting_chunk_ids: Vec<String>,
    pub generated_by: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceResult {
    pub pair_id: String,
    pub distribution: StanceDistribution,
    pub label: StanceLabel,
    pub analysis_text: String,
    pub claim_context: Option<String>,
    pub tweet_context: Option<String>,
    pub provider_tag: String,
}

/// What the classifier sees. The generated analysis stands in for the tweet.
///
/// This is also the request body of the remote classifier endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierInput {
    pub claim: String,
    pub analysis: String,
    pub claim_context: String,
    pub tweet_context: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    /// Network or service failure; the call may be retried.
    #[error("provider transport failure: {0}")]
    Transport(String),
    /// The provider answered with something that violates its contract.
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Transport(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("{stage}: {source}")]
    Provider {
        stage: &'static str,
        #[source]
        source: ProviderError,
    },
    #[error("generator returned an empty stance analysis")]
    EmptyAnalysis,
    #[error("pair {0:?} is already classified")]
    AlreadyClassified(String),
    #[error("missing record: {0}")]
    MissingRecord(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl PipelineError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, PipelineError::Provider { source, .. } if source.is_retryable())
    }
}

/// Maps texts to fixed-dimension, unit-norm vectors. Deterministic per text.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError>;
    fn tag(&self) -> &str;
}

pub trait TextGenerator: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError>;
    fn tag(&self) -> &str;
}

pub trait StanceClassifier: Send + Sync {
    fn classify(&self, input: &ClassifierInput) -> Result<StanceDistribution, ProviderError>;
    fn tag(&self) -> &str;
}

/// The provider set used by one pipeline run. Every call goes through the
/// shared limiter.
#[derive(Clone)]
pub struct Providers {
    pub embedder: Arc<dyn EmbeddingProvider>,
    pub generator: Arc<dyn TextGenerator>,
    pub classifier: Arc<dyn StanceClassifier>,
    pub limiter: Arc<RateLimiter>,
}

impl Providers {
    pub fn tag(&self) -> String {
        format!(
            "{}+{}+{}/prompts-{}",
            self.classifier.tag(),
            self.generator.tag(),
            self.embedder.tag(),
            templates::TEMPLATE_VERSION
        )
    }
}

/// Bounded exponential backoff for retryable provider failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub attempts: u32,
    #[serde(with = "secs")]
    pub initial_backoff: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    /// No waiting between attempts.
    pub fn immediate(attempts: u32) -> Self {
        RetryPolicy {
            attempts,
            initial_backoff: Duration::ZERO,
        }
    }

    pub(crate) fn run<T>(
        &self,
        limiter: &RateLimiter,
        mut call: impl FnMut() -> Result<T, ProviderError>,
    ) -> Result<T, ProviderError> {
        let mut backoff = self.initial_backoff;
        let mut attempt = 1;
        loop {
            limiter.acquire();
            match call() {
                Err(e) if e.is_retryable() && attempt < self.attempts.max(1) => {
                    thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub chunk_chars: usize,
    pub overlap_chars: usize,
    /// Chunks kept per subject.
    pub top_k: usize,
    pub retry: RetryPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            chunk_chars: 512,
            overlap_chars: 64,
            top_k: 4,
            retry: RetryPolicy::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.chunk_chars <= self.overlap_chars {
            return Err(PipelineError::Config(format!(
                "chunk_chars ({}) must exceed overlap_chars ({})",
                self.chunk_chars, self.overlap_chars
            )));
        }
        if self.top_k == 0 {
            return Err(PipelineError::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }
}
