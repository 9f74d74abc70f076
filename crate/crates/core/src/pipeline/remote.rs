//! HTTP adapters for hosted models. Every endpoint takes and returns JSON:
//!
//! | provider   | request                                                | response                                    |
//! |------------|--------------------------------------------------------|---------------------------------------------|
//! | classifier | `{claim, analysis, claim_context, tweet_context}`       | `{p_positive, p_neutral, p_negative}`       |
//! | generator  | `{prompt}`                                             | `{text}`                                    |
//! | embedder   | `{texts}`                                              | `{embeddings}`                              |
//!
//! A bearer token is read from the named environment variable when the
//! adapter is built. It is never logged; `Debug` output redacts it.

use std::fmt;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ClassifierInput, EmbeddingProvider, ProviderError, StanceClassifier, TextGenerator};
use crate::model::StanceDistribution;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

struct Endpoint {
    url: String,
    credential: Option<String>,
    agent: ureq::Agent,
}

impl fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Endpoint")
            .field("url", &self.url)
            .field("credential", &self.credential.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Endpoint {
    fn new(url: &str, credential_env: Option<&str>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Endpoint {
            url: url.to_string(),
            credential: credential_env.and_then(|name| std::env::var(name).ok()),
            agent,
        }
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(&self, body: &Req) -> Result<Resp, ProviderError> {
        let mut request = self.agent.post(&self.url);
        if let Some(token) = &self.credential {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if status >= 500 || status == 429 {
            return Err(ProviderError::Transport(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(ProviderError::Malformed(format!("HTTP {status}")));
        }
        response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Malformed(e.to_string()))
    }
}

#[derive(Debug)]
pub struct RemoteClassifier {
    endpoint: Endpoint,
    tag: String,
}

impl RemoteClassifier {
    pub fn new(url: &str, credential_env: Option<&str>, timeout: Duration) -> Self {
        RemoteClassifier {
            endpoint: Endpoint::new(url, credential_env, timeout),
            tag: "remote-classifier".into(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }
}

impl StanceClassifier for RemoteClassifier {
    fn classify(&self, input: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        // StanceDistribution validates on deserialize, so an invalid
        // distribution surfaces as Malformed.
        self.endpoint.post(input)
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}

#[derive(Serialize)]
struct PromptRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct TextResponse {
    text: String,
}

#[derive(Debug)]
pub struct RemoteGenerator {
    endpoint: Endpoint,
    tag: String,
}

impl RemoteGenerator {
    pub fn new(url: &str, credential_env: Option<&str>, timeout: Duration) -> Self {
        RemoteGenerator {
            endpoint: Endpoint::new(url, credential_env, timeout),
            tag: "remote-generator".into(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }
}

impl TextGenerator for RemoteGenerator {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let resp: TextResponse = self.endpoint.post(&PromptRequest { prompt })?;
        Ok(resp.text)
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct RemoteEmbedder {
    endpoint: Endpoint,
    dimension: usize,
    tag: String,
}

impl RemoteEmbedder {
    pub fn new(url: &str, credential_env: Option<&str>, dimension: usize, timeout: Duration) -> Self {
        RemoteEmbedder {
            endpoint: Endpoint::new(url, credential_env, timeout),
            dimension,
            tag: "remote-embedder".into(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let resp: EmbedResponse = self.endpoint.post(&EmbedRequest { texts })?;
        Ok(resp.embeddings)
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}
