//! Keyword extraction for claim retrieval queries.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::IngestError;

/// Attribution words that open fact-check claim texts ("Says ...").
pub const ATTRIBUTION_WORDS: [&str; 5] = ["says", "said", "claims", "claimed", "stated"];

/// Minimum length of a non-numeric keyword.
pub const MIN_KEYWORD_CHARS: usize = 3;

const STOPWORDS_TXT: &str = include_str!("../../data/stopwords.txt");

/// The bundled stopword list (lowercase).
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Picks the content tokens of a claim for a retrieval query.
pub trait KeywordExtractor: Send + Sync {
    fn extract(&self, claim_text: &str) -> Result<Vec<String>, IngestError>;
}

/// Stopword, numeral and length heuristic. Tokens come back lowercased, in
/// their original order, with case-insensitive duplicates removed.
#[derive(Debug, Clone, Copy, Default)]
pub struct StopwordExtractor;

impl KeywordExtractor for StopwordExtractor {
    fn extract(&self, claim_text: &str) -> Result<Vec<String>, IngestError> {
        extract_keywords(claim_text)
    }
}

pub fn extract_keywords(claim_text: &str) -> Result<Vec<String>, IngestError> {
    if claim_text.trim().is_empty() {
        return Err(IngestError::UnusableClaimText(claim_text.to_string()));
    }
    let stop = stopwords();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for token in tokenize(claim_text) {
        let keep = if is_numeric(&token) {
            true
        } else {
            !stop.contains(token.as_str())
                && !ATTRIBUTION_WORDS.contains(&token.as_str())
                && token.chars().count() >= MIN_KEYWORD_CHARS
        };
        if keep && seen.insert(token.clone()) {
            out.push(token);
        }
    }
    if out.is_empty() {
        return Err(IngestError::UnusableClaimText(claim_text.to_string()));
    }
    Ok(out)
}

pub fn is_numeric(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
}

/// Splits on whitespace and punctuation.
///
/// A `,` or `.` between two digits stays inside the token ("6,000", "25.5"),
/// an apostrophe between two letters joins a contraction ("don't"), and a
/// trailing possessive `'s` is dropped. Tokens are lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        let joins = match c {
            c if c.is_alphanumeric() => true,
            ',' | '.' => {
                !current.is_empty()
                    && prev.is_some_and(|p| p.is_ascii_digit())
                    && next.is_some_and(|n| n.is_ascii_digit())
            }
            '\'' => {
                !current.is_empty()
                    && prev.is_some_and(char::is_alphabetic)
                    && next.is_some_and(char::is_alphabetic)
            }
            _ => false,
        };
        if joins {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(finish_token(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        tokens.push(finish_token(current));
    }
    tokens.retain(|t| !t.is_empty());
    tokens
}

fn finish_token(token: String) -> String {
    match token.strip_suffix("'s") {
        Some(stem) => stem.to_string(),
        None => token,
    }
}
