use serde::{Deserialize, Serialize};

use super::{ContextDocument, PipelineError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub ordinal: usize,
    pub text: String,
    /// Unit-norm when present.
    pub embedding: Option<Vec<f64>>,
}

impl Chunk {
    pub fn chunk_id(&self) -> String {
        format!("{}#{}", self.doc_id, self.ordinal)
    }
}

/// Splits a document into windows of at most `chunk_chars` characters
/// starting every `chunk_chars - overlap_chars` characters, so consecutive
/// chunks share `overlap_chars` characters. Dropping the first
/// `overlap_chars` characters of every chunk after the first and
/// concatenating gives back the document.
pub fn chunk_document(
    doc: &ContextDocument,
    chunk_chars: usize,
    overlap_chars: usize,
) -> Result<Vec<Chunk>, PipelineError> {
    if chunk_chars <= overlap_chars {
        return Err(PipelineError::Config(format!(
            "chunk_chars ({chunk_chars}) must exceed overlap_chars ({overlap_chars})"
        )));
    }
    let chars: Vec<char> = doc.text.chars().collect();
    let stride = chunk_chars - overlap_chars;
    Ok((0..chars.len())
        .step_by(stride)
        .enumerate()
        .map(|(ordinal, start)| Chunk {
            doc_id: doc.doc_id.clone(),
            ordinal,
            text: chars[start..(start + chunk_chars).min(chars.len())].iter().collect(),
            embedding: None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::pipeline::SubjectKind;

    fn doc(text: &str) -> ContextDocument {
        ContextDocument {
            doc_id: "d".into(),
            subject_kind: SubjectKind::Claim,
            subject_id: "c".into(),
            text: text.into(),
            source_tag: "test".into(),
        }
    }

    fn offsets(text: &str, chunks: &[Chunk]) -> Vec<usize> {
        // chunk texts are unique prefixes here, so search positions directly
        chunks
            .iter()
            .map(|c| text.find(&c.text).expect("chunk is a substring"))
            .collect()
    }

    #[test]
    fn short_doc_is_one_chunk() {
        let chunks = chunk_document(&doc("0123456789"), 20, 5).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, "0123456789");
    }

    #[test]
    fn stride_offsets() {
        // 100 distinct characters so every chunk position is unambiguous
        let text: String = (0..100u32).map(|i| char::from_u32(0x4e00 + i).unwrap()).collect();
        let chunks = chunk_document(&doc(&text), 40, 10).unwrap();
        let starts: Vec<usize> = offsets(&text, &chunks)
            .into_iter()
            .map(|byte| text[..byte].chars().count())
            .collect();
        assert_eq!(starts, [0, 30, 60, 90]);
        assert!(chunks.iter().all(|c| c.text.chars().count() <= 40));
    }

    #[test]
    fn empty_doc_has_no_chunks() {
        assert!(chunk_document(&doc(""), 40, 10).unwrap().is_empty());
    }

    #[test]
    fn overlap_must_be_smaller_than_chunk() {
        assert!(chunk_document(&doc("abc"), 10, 10).is_err());
    }

    proptest! {
        #[test]
        fn removing_overlaps_reconstructs(text in "\\PC{0,300}", chunk in 1usize..50, overlap_seed in 0usize..50) {
            let overlap = overlap_seed % chunk;
            let chunks = chunk_document(&doc(&text), chunk, overlap).unwrap();
            let mut rebuilt = String::new();
            for (i, c) in chunks.iter().enumerate() {
                prop_assert!(c.text.chars().count() <= chunk);
                prop_assert_eq!(c.ordinal, i);
                let skip = if i == 0 { 0 } else { overlap };
                rebuilt.extend(c.text.chars().skip(skip));
            }
            prop_assert_eq!(rebuilt, text);
        }
    }
}
