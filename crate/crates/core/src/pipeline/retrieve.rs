use std::cmp::Ordering;

use super::chunk::{chunk_document, Chunk};
use super::templates::{self, TEMPLATE_VERSION};
use super::{
    ContextDocument, ContextSummary, EmbeddingProvider, PipelineConfig, PipelineError, ProviderError, Providers,
    SubjectKind,
};

/// The claim or tweet whose context is being retrieved.
#[derive(Debug, Clone, Copy)]
pub struct Subject<'a> {
    pub kind: SubjectKind,
    pub id: &'a str,
    pub text: &'a str,
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn check_embeddings(
    embedder: &dyn EmbeddingProvider,
    vectors: &[Vec<f64>],
    expected: usize,
) -> Result<(), ProviderError> {
    if vectors.len() != expected {
        return Err(ProviderError::Malformed(format!(
            "expected {expected} embeddings, got {}",
            vectors.len()
        )));
    }
    for v in vectors {
        if v.len() != embedder.dimension() {
            return Err(ProviderError::Malformed(format!(
                "embedding dimension {} != {}",
                v.len(),
                embedder.dimension()
            )));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(ProviderError::Malformed(format!("embedding norm {norm} is not 1")));
        }
    }
    Ok(())
}

/// Chunks every document, ranks chunks by cosine similarity to the subject
/// and summarizes the best `top_k` with the generator. Ties rank by
/// `(doc_id, ordinal)` ascending. With no documents the summary is empty and
/// no provider is called.
pub fn retrieve_context(
    subject: Subject<'_>,
    docs: &[&ContextDocument],
    config: &PipelineConfig,
    providers: &Providers,
) -> Result<ContextSummary, PipelineError> {
    config.validate()?;
    let mut chunks: Vec<Chunk> = Vec::new();
    for doc in docs {
        chunks.extend(chunk_document(doc, config.chunk_chars, config.overlap_chars)?);
    }
    let generated_by = format!("{}/summarize-{TEMPLATE_VERSION}", providers.generator.tag());
    if chunks.is_empty() {
        return Ok(ContextSummary {
            subject_kind: subject.kind,
            subject_id: subject.id.to_string(),
            summary_text: String::new(),
            supporting_chunk_ids: Vec::new(),
            generated_by,
        });
    }

    let mut texts: Vec<&str> = Vec::with_capacity(chunks.len() + 1);
    texts.push(subject.text);
    texts.extend(chunks.iter().map(|c| c.text.as_str()));
    let embedder = providers.embedder.as_ref();
    let vectors = config
        .retry
        .run(&providers.limiter, || {
            let v = embedder.embed(&texts)?;
            check_embeddings(embedder, &v, texts.len())?;
            Ok(v)
        })
        .map_err(|source| PipelineError::Provider {
            stage: "embed",
            source,
        })?;
    let mut vectors = vectors.into_iter();
    let query = vectors.next().expect("subject embedding");
    for (chunk, v) in chunks.iter_mut().zip(vectors) {
        chunk.embedding = Some(v);
    }

    let mut scored: Vec<(f64, &Chunk)> = chunks
        .iter()
        .map(|c| (cosine_similarity(&query, c.embedding.as_deref().unwrap_or_default()), c))
        .collect();
    scored.sort_by(|(sa, a), (sb, b)| {
        sb.partial_cmp(sa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
            .then_with(|| a.ordinal.cmp(&b.ordinal))
    });
    scored.truncate(config.top_k);

    let passages = scored
        .iter()
        .enumerate()
        .map(|(i, (_, c))| format!("[{}] {}", i + 1, c.text))
        .collect::<Vec<_>>()
        .join("\n");
    let prompt = templates::render(
        templates::SUMMARIZE,
        &[("subject_kind", subject.kind.as_str()), ("subject", subject.text), ("passages", &passages)],
    );
    let generator = providers.generator.as_ref();
    let summary_text = config
        .retry
        .run(&providers.limiter, || generator.generate(&prompt))
        .map_err(|source| PipelineError::Provider {
            stage: "summarize",
            source,
        })?;

    Ok(ContextSummary {
        subject_kind: subject.kind,
        subject_id: subject.id.to_string(),
        summary_text,
        supporting_chunk_ids: scored.iter().map(|(_, c)| c.chunk_id()).collect(),
        generated_by,
    })
}
