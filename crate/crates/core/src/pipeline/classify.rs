use chrono::{DateTime, Utc};

use super::analysis::generate_stance_analysis;
use super::retrieve::{retrieve_context, Subject};
use super::{
    ClassifierInput, ContextDocument, PipelineConfig, PipelineError, Providers, StanceResult, SubjectKind,
};
use crate::model::{Claim, ClaimTweetPair, Tweet};
use crate::store::Dataset;

/// The records a pair classification reads.
#[derive(Debug, Clone)]
pub struct PairContext<'a> {
    pub claim: &'a Claim,
    pub tweet: &'a Tweet,
    pub claim_docs: Vec<&'a ContextDocument>,
    pub tweet_docs: Vec<&'a ContextDocument>,
}

impl<'a> PairContext<'a> {
    /// Resolves a pair's members and their documents from a snapshot.
    pub fn resolve(data: &'a Dataset, pair: &ClaimTweetPair) -> Result<Self, PipelineError> {
        let claim = data
            .claim(&pair.claim_id)
            .ok_or_else(|| PipelineError::MissingRecord(format!("claim {:?}", pair.claim_id)))?;
        let tweet = data
            .tweet(&pair.tweet_id)
            .ok_or_else(|| PipelineError::MissingRecord(format!("tweet {:?}", pair.tweet_id)))?;
        Ok(PairContext {
            claim,
            tweet,
            claim_docs: data.documents_for(SubjectKind::Claim, &claim.claim_id),
            tweet_docs: data.documents_for(SubjectKind::Tweet, &tweet.tweet_id),
        })
    }
}

/// Retrieves context for both members, generates the stance analysis and
/// classifies. `reclassify` must be set to run on an already labeled pair.
pub fn classify_pair(
    pair: &ClaimTweetPair,
    ctx: &PairContext<'_>,
    config: &PipelineConfig,
    providers: &Providers,
    reclassify: bool,
) -> Result<StanceResult, PipelineError> {
    if pair.is_classified() && !reclassify {
        return Err(PipelineError::AlreadyClassified(pair.pair_id.clone()));
    }
    let claim_ctx = retrieve_context(
        Subject {
            kind: SubjectKind::Claim,
            id: &ctx.claim.claim_id,
            text: &ctx.claim.text,
        },
        &ctx.claim_docs,
        config,
        providers,
    )?;
    let tweet_ctx = retrieve_context(
        Subject {
            kind: SubjectKind::Tweet,
            id: &ctx.tweet.tweet_id,
            text: &ctx.tweet.text,
        },
        &ctx.tweet_docs,
        config,
        providers,
    )?;
    let analysis = generate_stance_analysis(ctx.claim, ctx.tweet, &claim_ctx, &tweet_ctx, config, providers)?;
    let input = ClassifierInput {
        claim: ctx.claim.text.clone(),
        analysis,
        claim_context: claim_ctx.summary_text,
        tweet_context: tweet_ctx.summary_text,
    };
    let classifier = providers.classifier.as_ref();
    let distribution = config
        .retry
        .run(&providers.limiter, || classifier.classify(&input))
        .map_err(|source| PipelineError::Provider {
            stage: "classify",
            source,
        })?;
    let non_empty = |s: String| (!s.is_empty()).then_some(s);
    Ok(StanceResult {
        pair_id: pair.pair_id.clone(),
        label: distribution.label(),
        distribution,
        analysis_text: input.analysis,
        claim_context: non_empty(input.claim_context),
        tweet_context: non_empty(input.tweet_context),
        provider_tag: providers.tag(),
    })
}

/// The pair with the result recorded on it.
pub fn apply_result(pair: &ClaimTweetPair, result: &StanceResult, classified_at: DateTime<Utc>) -> ClaimTweetPair {
    ClaimTweetPair {
        stance: Some(result.label),
        distribution: Some(result.distribution),
        analysis_text: Some(result.analysis_text.clone()),
        claim_context: result.claim_context.clone(),
        tweet_context: result.tweet_context.clone(),
        classified_at: Some(classified_at),
        provider_tag: Some(result.provider_tag.clone()),
        ..pair.clone()
    }
}
