mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use stancemap::model::{Claim, ClaimTweetPair, StanceDistribution, StanceLabel, Tweet, Verdict};
use stancemap::pipeline::mock::{mock_providers, EchoGenerator, HashEmbedder, RuleClassifier};
use stancemap::pipeline::templates::NO_CONTEXT;
use stancemap::pipeline::{
    chunk_document, classify_pair, cosine_similarity, generate_stance_analysis, retrieve_context, run_batch,
    BatchOptions, ClassifierInput, ContextDocument, ContextSummary, EmbeddingProvider, PairContext,
    PipelineConfig, PipelineError, ProviderError, Providers, RetryPolicy, StanceClassifier, Subject, SubjectKind,
    TextGenerator,
};
use stancemap::rate::RateLimiter;
use stancemap::store::{Dataset, MemoryStore, RecordBatch, Store};

fn config() -> PipelineConfig {
    PipelineConfig {
        retry: RetryPolicy::immediate(3),
        ..PipelineConfig::default()
    }
}

fn providers(
    embedder: impl EmbeddingProvider + 'static,
    generator: impl TextGenerator + 'static,
    classifier: impl StanceClassifier + 'static,
) -> Providers {
    Providers {
        embedder: Arc::new(embedder),
        generator: Arc::new(generator),
        classifier: Arc::new(classifier),
        limiter: Arc::new(RateLimiter::unlimited()),
    }
}

struct Down;

impl EmbeddingProvider for Down {
    fn dimension(&self) -> usize {
        2
    }
    fn embed(&self, _: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Err(ProviderError::Transport("down".into()))
    }
    fn tag(&self) -> &str {
        "down"
    }
}

impl TextGenerator for Down {
    fn generate(&self, _: &str) -> Result<String, ProviderError> {
        Err(ProviderError::Transport("down".into()))
    }
    fn tag(&self) -> &str {
        "down"
    }
}

impl StanceClassifier for Down {
    fn classify(&self, _: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        Err(ProviderError::Transport("down".into()))
    }
    fn tag(&self) -> &str {
        "down"
    }
}

/// Embeds known texts to fixed vectors with a chosen cosine to the subject.
struct Table(HashMap<String, f64>);

impl EmbeddingProvider for Table {
    fn dimension(&self) -> usize {
        2
    }
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| {
                let s = self.0.get(*t).copied().unwrap_or(1.0);
                vec![s, (1.0 - s * s).sqrt()]
            })
            .collect())
    }
    fn tag(&self) -> &str {
        "table"
    }
}

struct Fixed(StanceDistribution);

impl StanceClassifier for Fixed {
    fn classify(&self, _: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        Ok(self.0)
    }
    fn tag(&self) -> &str {
        "fixed"
    }
}

struct Recording(Mutex<Vec<ClassifierInput>>);

impl StanceClassifier for Recording {
    fn classify(&self, input: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        self.0.lock().unwrap().push(input.clone());
        RuleClassifier.classify(input)
    }
    fn tag(&self) -> &str {
        "recording"
    }
}

struct Constant(&'static str);

impl TextGenerator for Constant {
    fn generate(&self, _: &str) -> Result<String, ProviderError> {
        Ok(self.0.to_string())
    }
    fn tag(&self) -> &str {
        "constant"
    }
}

/// Fails the first `n` calls with a transport error.
struct Flaky {
    failures: usize,
    calls: AtomicUsize,
}

impl StanceClassifier for Flaky {
    fn classify(&self, input: &ClassifierInput) -> Result<StanceDistribution, ProviderError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures {
            return Err(ProviderError::Transport("blip".into()));
        }
        RuleClassifier.classify(input)
    }
    fn tag(&self) -> &str {
        "flaky"
    }
}

fn doc(id: &str, text: &str) -> ContextDocument {
    ContextDocument {
        doc_id: id.into(),
        subject_kind: SubjectKind::Claim,
        subject_id: "c".into(),
        text: text.into(),
        source_tag: "test".into(),
    }
}

fn subject(text: &str) -> Subject<'_> {
    Subject {
        kind: SubjectKind::Claim,
        id: "c",
        text,
    }
}

#[test]
fn no_documents_means_empty_summary_without_calls() {
    let p = providers(Down, Down, Down);
    let s = retrieve_context(subject("anything"), &[], &config(), &p).unwrap();
    assert_eq!(s.summary_text, "");
    assert!(s.supporting_chunk_ids.is_empty());
}

#[test]
fn small_pool_selects_everything() {
    let d = doc("d", "a short document");
    let s = retrieve_context(subject("short"), &[&d], &PipelineConfig { top_k: 5, ..config() }, &mock_providers()).unwrap();
    assert_eq!(s.supporting_chunk_ids, ["d#0"]);
    assert!(s.summary_text.contains("[1] a short document"));
    assert_eq!(s.generated_by, "mock-echo/summarize-v1");
}

#[test]
fn top_k_in_score_order() {
    let d = doc("d", "aaaaaaaaaabbbbbbbbbbcccccccccc");
    let sims = [("aaaaaaaaaa", 0.9), ("bbbbbbbbbb", 0.5), ("cccccccccc", 0.1)];
    let embedder = Table(sims.iter().map(|(t, s)| (t.to_string(), *s)).collect());
    let cfg = PipelineConfig {
        chunk_chars: 10,
        overlap_chars: 0,
        top_k: 2,
        ..config()
    };
    let s = retrieve_context(subject("subject"), &[&d], &cfg, &providers(embedder, EchoGenerator, Down)).unwrap();
    assert_eq!(s.supporting_chunk_ids, ["d#0", "d#1"]);
    let reversed = Table([("aaaaaaaaaa", 0.1), ("bbbbbbbbbb", 0.5), ("cccccccccc", 0.9)].iter().map(|(t, s)| (t.to_string(), *s)).collect());
    let s = retrieve_context(subject("subject"), &[&d], &cfg, &providers(reversed, EchoGenerator, Down)).unwrap();
    assert_eq!(s.supporting_chunk_ids, ["d#2", "d#1"]);
}

#[test]
fn embedder_outage_is_retryable() {
    let d = doc("d", "text");
    let err = retrieve_context(subject("x"), &[&d], &config(), &providers(Down, EchoGenerator, Down)).unwrap_err();
    assert!(err.is_retryable());
}

/// Independent ranking: cosine from scratch, sorted by (-score, doc, ordinal).
fn brute_force(subject_text: &str, docs: &[ContextDocument], cfg: &PipelineConfig) -> Vec<String> {
    let mut all = Vec::new();
    for d in docs {
        for c in chunk_document(d, cfg.chunk_chars, cfg.overlap_chars).unwrap() {
            let a = HashEmbedder::vector(subject_text);
            let b = HashEmbedder::vector(&c.text);
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            all.push((dot / (norm(&a) * norm(&b)), c.doc_id.clone(), c.ordinal));
        }
    }
    all.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    all.into_iter().take(cfg.top_k).map(|(_, d, o)| format!("{d}#{o}")).collect()
}

const WORDS: [&str; 8] = ["tax", "vote", "wind", "cancer", "ballot", "school", "crime", "wage"];

proptest! {
    #[test]
    fn retrieval_matches_brute_force(
        docs in proptest::collection::vec(proptest::collection::vec(proptest::sample::select(WORDS.to_vec()), 1..12), 1..4),
        query in proptest::collection::vec(proptest::sample::select(WORDS.to_vec()), 1..4),
        top_k in 1usize..6,
    ) {
        let docs: Vec<ContextDocument> = docs.iter().enumerate().map(|(i, w)| doc(&format!("d{i}"), &w.join(" "))).collect();
        let cfg = PipelineConfig { chunk_chars: 24, overlap_chars: 6, top_k, ..config() };
        let pool: usize = docs.iter().map(|d| chunk_document(d, 24, 6).unwrap().len()).sum();
        prop_assume!(pool <= 20);
        let refs: Vec<&ContextDocument> = docs.iter().collect();
        let q = query.join(" ");
        let s = retrieve_context(subject(&q), &refs, &cfg, &mock_providers()).unwrap();
        prop_assert_eq!(s.supporting_chunk_ids.len(), top_k.min(pool));
        prop_assert_eq!(s.supporting_chunk_ids, brute_force(&q, &docs, &cfg));
    }
}

#[test]
fn cosine_of_zero_vector_is_zero() {
    assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    assert!((cosine_similarity(&[1.0, 1.0], &[2.0, 2.0]) - 1.0).abs() < 1e-12);
}

fn claim() -> Claim {
    Claim::new("c1", "Wind turbines cause cancer", ["health"], Verdict::False, common::date(2019, 4, 3)).unwrap()
}

fn tweet(id: &str, text: &str) -> Tweet {
    Tweet {
        tweet_id: id.into(),
        text: text.into(),
        created_at: Utc.with_ymd_and_hms(2019, 4, 10, 8, 0, 0).unwrap(),
        raw_location: None,
        geo: None,
    }
}

fn empty_summary(kind: SubjectKind) -> ContextSummary {
    ContextSummary {
        subject_kind: kind,
        subject_id: "x".into(),
        summary_text: String::new(),
        supporting_chunk_ids: vec![],
        generated_by: "g".into(),
    }
}

#[test]
fn echoed_analysis_carries_claim_tweet_and_markers() {
    let t = tweet("t1", "my neighbor says the turbines gave him cancer");
    let out = generate_stance_analysis(
        &claim(),
        &t,
        &empty_summary(SubjectKind::Claim),
        &empty_summary(SubjectKind::Tweet),
        &config(),
        &mock_providers(),
    )
    .unwrap();
    assert!(out.contains("Wind turbines cause cancer"));
    assert!(out.contains(&t.text));
    assert_eq!(out.matches(NO_CONTEXT).count(), 2);
}

#[test]
fn empty_generator_output_is_an_error() {
    let err = generate_stance_analysis(
        &claim(),
        &tweet("t1", "text"),
        &empty_summary(SubjectKind::Claim),
        &empty_summary(SubjectKind::Tweet),
        &config(),
        &providers(HashEmbedder, Constant(""), RuleClassifier),
    )
    .unwrap_err();
    assert_eq!(err, PipelineError::EmptyAnalysis);
    assert!(!err.is_retryable());
}

fn classify_with(classifier: impl StanceClassifier + 'static, text: &str) -> Result<stancemap::pipeline::StanceResult, PipelineError> {
    let c = claim();
    let t = tweet("t1", text);
    let pair = ClaimTweetPair::unclassified("c1", "t1");
    let ctx = PairContext {
        claim: &c,
        tweet: &t,
        claim_docs: vec![],
        tweet_docs: vec![],
    };
    classify_pair(&pair, &ctx, &config(), &providers(HashEmbedder, EchoGenerator, classifier), false)
}

#[test]
fn label_follows_distribution() {
    let r = classify_with(Fixed(StanceDistribution::new(0.6, 0.3, 0.1).unwrap()), "whatever is said").unwrap();
    assert_eq!(r.label, StanceLabel::Positive);
    let r = classify_with(Fixed(StanceDistribution::new(0.4, 0.4, 0.2).unwrap()), "whatever is said").unwrap();
    assert_eq!(r.label, StanceLabel::NeutralNoStance);
    assert_eq!(r.provider_tag, "fixed+mock-echo+mock-hash64/prompts-v1");
}

#[test]
fn mock_rule_on_fixture_tweet() {
    let r = classify_with(RuleClassifier, "The turbines and cancer story is false, read the studies").unwrap();
    assert_eq!(r.label, StanceLabel::Negative);
    assert!((r.distribution.p_negative() - 0.8).abs() < 1e-12);
}

#[test]
fn classifier_sees_analysis_not_tweet() {
    let recording = Arc::new(Recording(Mutex::new(Vec::new())));
    let c = claim();
    let t = tweet("t1", "raw tweet text that must not reach the classifier");
    let ctx = PairContext {
        claim: &c,
        tweet: &t,
        claim_docs: vec![],
        tweet_docs: vec![],
    };
    let p = Providers {
        embedder: Arc::new(HashEmbedder),
        generator: Arc::new(Constant("generated stance analysis")),
        classifier: recording.clone(),
        limiter: Arc::new(RateLimiter::unlimited()),
    };
    classify_pair(&ClaimTweetPair::unclassified("c1", "t1"), &ctx, &config(), &p, false).unwrap();
    let seen = recording.0.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].analysis, "generated stance analysis");
    assert_eq!(seen[0].claim, c.text);
    for field in [&seen[0].claim, &seen[0].analysis, &seen[0].claim_context, &seen[0].tweet_context] {
        assert!(!field.contains(&t.text));
    }
}

#[test]
fn transient_classifier_failure_is_retried() {
    let flaky = Flaky {
        failures: 2,
        calls: AtomicUsize::new(0),
    };
    assert!(classify_with(flaky, "neutral chatter about windmills").is_ok());
    let hopeless = Flaky {
        failures: 3,
        calls: AtomicUsize::new(0),
    };
    assert!(classify_with(hopeless, "neutral chatter about windmills").unwrap_err().is_retryable());
}

#[test]
fn already_classified_needs_reclassify() {
    let c = claim();
    let t = tweet("t1", "text here");
    let ctx = PairContext {
        claim: &c,
        tweet: &t,
        claim_docs: vec![],
        tweet_docs: vec![],
    };
    let mut pair = ClaimTweetPair::unclassified("c1", "t1");
    pair.stance = Some(StanceLabel::Positive);
    pair.distribution = Some(StanceDistribution::peaked(StanceLabel::Positive, 0.8).unwrap());
    let p = mock_providers();
    assert!(matches!(
        classify_pair(&pair, &ctx, &config(), &p, false),
        Err(PipelineError::AlreadyClassified(_))
    ));
    assert!(classify_pair(&pair, &ctx, &config(), &p, true).is_ok());
}

fn five_pair_store() -> MemoryStore {
    let store = MemoryStore::new();
    store.put_records(RecordBatch::Claims(vec![claim()])).unwrap();
    let tweets: Vec<Tweet> = (0..5).map(|i| tweet(&format!("t{i}"), &format!("post number {i} on turbines"))).collect();
    store.put_records(RecordBatch::Tweets(tweets)).unwrap();
    let pairs = (0..5).map(|i| ClaimTweetPair::unclassified("c1", &format!("t{i}"))).collect();
    store.put_records(RecordBatch::Pairs(pairs)).unwrap();
    store
}

fn batch(store: &MemoryStore, p: &Providers, concurrency: usize) -> stancemap::pipeline::BatchReport {
    let snap = store.snapshot();
    let pairs: Vec<ClaimTweetPair> = snap.pairs().cloned().collect();
    let data: &Dataset = &snap;
    let mut commit = |pair: ClaimTweetPair| {
        store.put_records(RecordBatch::Pairs(vec![pair])).map(|_| ()).map_err(|e| e.to_string())
    };
    let options = BatchOptions {
        concurrency,
        reclassify: false,
    };
    run_batch(data, &pairs, options, &config(), p, &common::clock(), &mut commit)
}

#[test]
fn batch_happy_path_skip_and_failure() {
    let store = five_pair_store();
    let r = batch(&store, &mock_providers(), 3);
    assert_eq!((r.classified, r.failed, r.skipped), (5, 0, 0));
    assert!(store.snapshot().pairs().all(ClaimTweetPair::is_classified));

    let store = five_pair_store();
    let snap = store.snapshot();
    let mut done: Vec<ClaimTweetPair> = snap.pairs().take(2).cloned().collect();
    for p in &mut done {
        p.stance = Some(StanceLabel::Negative);
        p.distribution = Some(StanceDistribution::peaked(StanceLabel::Negative, 0.9).unwrap());
    }
    store.put_records(RecordBatch::Pairs(done)).unwrap();
    let r = batch(&store, &mock_providers(), 2);
    assert_eq!((r.classified, r.failed, r.skipped), (3, 0, 2));

    let store = five_pair_store();
    let r = batch(&store, &providers(HashEmbedder, EchoGenerator, Down), 4);
    assert_eq!((r.classified, r.failed, r.skipped), (0, 5, 0));
    assert_eq!(r.failures.len(), 5);
    assert!(r.failures.iter().all(|f| f.retryable));
    assert!(store.snapshot().pairs().all(|p| !p.is_classified()));
}

#[test]
fn batch_is_deterministic_across_concurrency() {
    let run = |concurrency| {
        let store = MemoryStore::new();
        common::load_sample(&store);
        let r = batch(&store, &mock_providers(), concurrency);
        assert_eq!(r.total(), 54);
        assert_eq!(r.classified, 54);
        store.snapshot().checksum()
    };
    assert_eq!(run(1), run(8));
}
