//! Deterministic offline providers.
//!
//! * [`HashEmbedder`]: token counts hashed (FNV-1a) into 64 buckets, then
//!   unit-normalized. Text without tokens maps to the first basis vector.
//! * [`EchoGenerator`]: returns its prompt unchanged.
//! * [`RuleClassifier`]: a fixed rule table, checked in order.
//!
//! Rule table of [`RuleClassifier`]. The scanned text is the `Tweet:` line of
//! the analysis when there is one (the echoed analysis prompt), otherwise the
//! whole analysis. It is tokenized like claim keywords are.
//!
//! 1. **Negative** `(0.1, 0.1, 0.8)`: a negation cue lies within
//!    [`CUE_WINDOW`] tokens of a claim keyword or of a referring word
//!    (`this`, `that`, `it`, `claim`). Negation cues are [`NEGATION_CUES`],
//!    plus `not` directly followed by an agreement cue (`not true`).
//! 2. **Positive** `(0.8, 0.1, 0.1)`: any agreement cue from
//!    [`AGREEMENT_CUES`] not preceded by `not`.
//! 3. **Neutral** `(0.2, 0.6, 0.2)` otherwise.

use std::collections::HashSet;

use super::{
    ClassifierInput, EmbeddingProvider, ProviderError, Providers, StanceClassifier, TextGenerator,
};
use crate::ingestion::{extract_keywords, tokenize};
use crate::model::{StanceDistribution, StanceLabel};
use crate::rate::RateLimiter;
use std::sync::Arc;

pub const MOCK_DIMENSION: usize = 64;

pub const NEGATION_CUES: &[&str] = &[
    "false",
    "fake",
    "hoax",
    "lie",
    "lies",
    "lying",
    "wrong",
    "debunked",
    "misleading",
    "myth",
    "untrue",
    "bogus",
    "nonsense",
];

pub const AGREEMENT_CUES: &[&str] = &["true", "confirmed", "right", "correct", "accurate", "agree", "indeed", "exactly"];

pub const REFERRING_WORDS: &[&str] = &["this", "that", "it", "claim"];

/// Maximum token distance between a negation cue and its target.
pub const CUE_WINDOW: usize = 5;

/// The dominant probability of every rule.
pub const RULE_DOMINANT: f64 = 0.8;
pub const DEFAULT_NEUTRAL: f64 = 0.6;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HashEmbedder;

impl HashEmbedder {
    pub fn vector(text: &str) -> Vec<f64> {
        let mut v = vec![0.0; MOCK_DIMENSION];
        for token in tokenize(text) {
            v[(fnv1a(token.as_bytes()) % MOCK_DIMENSION as u64) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn dimension(&self) -> usize {
        MOCK_DIMENSION
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| Self::vector(t)).collect())
    }

    fn tag(&self) -> &str {
        "mock-hash64"
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EchoGenerator;

impl TextGenerator for EchoGenerator {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        Ok(prompt.to_string())
    }

    fn tag(&self) -> &str {
        "mock-echo"
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleClassifier;

fn scanned_text(analysis: &str) -> &str {
    analysis
        .lines()
        .find_map(|line| line.strip_prefix("Tweet:"))
        .unwrap_or(analysis)
}

impl RuleClassifier {
    /// The label the rule table assigns.
    pub fn rule(claim: &str, analysis: &str) -> StanceLabel {
        let tokens = tokenize(scanned_text(analysis));
        let keywords: HashSet<String> = extract_keywords(claim).unwrap_or_default().into_iter().collect();
        let is_agreement = |t: &str| AGREEMENT_CUES.contains(&t);
        let negated = |i: usize| i > 0 && tokens[i - 1] == "not";

        let negations: Vec<usize> = (0..tokens.len())
            .filter(|&i| NEGATION_CUES.contains(&tokens[i].as_str()) || (is_agreement(&tokens[i]) && negated(i)))
            .collect();
        let targets: Vec<usize> = (0..tokens.len())
            .filter(|&i| keywords.contains(&tokens[i]) || REFERRING_WORDS.contains(&tokens[i].as_str()))
            .collect();
        let near = negations
            .iter()
            .any(|&n| targets.iter().any(|&t| t != n && t.abs_diff(n) <= CUE_WINDOW));
        if near {
            return StanceLabel::Negative;
        }
        if (0..tokens.len()).any(|i| is_agreement(&tokens[i]) && !negated(i)) {
            return StanceLabel::Positive;
        }
        StanceLabel::NeutralNoStance
    }
}

impl StanceClassifier for RuleClassifier {
    fn classify(&self, input: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        let (label, dominant) = match Self::rule(&input.claim, &input.analysis) {
            StanceLabel::NeutralNoStance => (StanceLabel::NeutralNoStance, DEFAULT_NEUTRAL),
            other => (other, RULE_DOMINANT),
        };
        StanceDistribution::peaked(label, dominant).map_err(|e| ProviderError::Malformed(e.to_string()))
    }

    fn tag(&self) -> &str {
        "mock-rules"
    }
}

/// Hash embedder, echo generator and rule classifier with no rate limit.
pub fn mock_providers() -> Providers {
    Providers {
        embedder: Arc::new(HashEmbedder),
        generator: Arc::new(EchoGenerator),
        classifier: Arc::new(RuleClassifier),
        limiter: Arc::new(RateLimiter::unlimited()),
    }
}
