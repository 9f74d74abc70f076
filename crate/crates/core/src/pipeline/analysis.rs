use super::templates::{self, NO_CONTEXT};
use super::{ContextSummary, PipelineConfig, PipelineError, Providers};
use crate::model::{Claim, Tweet};

fn or_no_context(text: &str) -> &str {
    if text.trim().is_empty() {
        NO_CONTEXT
    } else {
        text
    }
}

/// Asks the generator to explain the tweet's stance toward the claim. The
/// returned text replaces the tweet in the classifier input.
pub fn generate_stance_analysis(
    claim: &Claim,
    tweet: &Tweet,
    claim_ctx: &ContextSummary,
    tweet_ctx: &ContextSummary,
    config: &PipelineConfig,
    providers: &Providers,
) -> Result<String, PipelineError> {
    let prompt = templates::render(
        templates::ANALYSIS,
        &[
            ("claim", &claim.text),
            ("tweet", &tweet.text),
            ("claim_context", or_no_context(&claim_ctx.summary_text)),
            ("tweet_context", or_no_context(&tweet_ctx.summary_text)),
        ],
    );
    let generator = providers.generator.as_ref();
    let analysis = config
        .retry
        .run(&providers.limiter, || generator.generate(&prompt))
        .map_err(|source| PipelineError::Provider {
            stage: "analyze",
            source,
        })?;
    if analysis.trim().is_empty() {
        return Err(PipelineError::EmptyAnalysis);
    }
    Ok(analysis)
}
