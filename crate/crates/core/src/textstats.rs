//! Text-derived language features.
//!
//! Words are Unicode word-boundary segments that contain at least one
//! letter, mark or decimal digit. Word length is counted in extended
//! grapheme clusters. All statistics of a [`TextProfile`] are taken over
//! the same contiguous sample of tokens.

use std::collections::HashMap;
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};
use crate::ingest::CorpusSource;
use crate::model::{LanguageRecord, TextProfile};

static LEXICAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{L}\p{M}\p{Nd}]").expect("valid pattern"));

/// Lexical tokens of a text, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if let Some(bad) = tokens.iter().find(|t| !is_lexical(t)) {
            return Err(Error::Invariant(format!(
                "token {bad:?} has no alphanumeric grapheme"
            )));
        }
        Ok(TokenSequence { tokens })
    }

    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_lexical(segment: &str) -> bool {
    LEXICAL.is_match(segment)
}

/// Splits NFC text at Unicode word boundaries and drops segments without
/// any letter, mark or decimal digit (whitespace and punctuation).
pub fn tokenize(text: &str) -> TokenSequence {
    let tokens = text
        .split_word_bounds()
        .filter(|seg| is_lexical(seg))
        .map(str::to_owned)
        .collect();
    TokenSequence { tokens }
}

pub fn grapheme_length(token: &str) -> usize {
    token.graphemes(true).count()
}

/// A contiguous window of a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample<'a> {
    pub tokens: &'a [String],
    pub offset: usize,
}

/// Draws a window of `target` consecutive tokens starting at a uniformly
/// chosen token offset. Sequences no longer than `target` are returned
/// whole with offset 0. The same seed always selects the same window.
pub fn sample_contiguous(tokens: &TokenSequence, target: usize, seed: u64) -> Result<Sample<'_>> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    if target == 0 {
        return Err(Error::Invariant("sample target must be >= 1".into()));
    }
    let n = tokens.len();
    if n <= target {
        return Ok(Sample {
            tokens: &tokens.tokens,
            offset: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = rng.random_range(0..=n - target);
    Ok(Sample {
        tokens: &tokens.tokens[offset..offset + target],
        offset,
    })
}

/// Mean grapheme-cluster length per token, multiplied by `script_scale`.
pub fn mean_word_length<S: AsRef<str>>(tokens: &[S], script_scale: f64) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    if !(script_scale.is_finite() && script_scale > 0.0) {
        return Err(Error::Invariant(format!(
            "script_scale must be > 0, got {script_scale}"
        )));
    }
    let total: usize = tokens.iter().map(|t| grapheme_length(t.as_ref())).sum();
    Ok(total as f64 / tokens.len() as f64 * script_scale)
}

pub fn type_token_ratio<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    let types = counts(tokens).len();
    Ok(types as f64 / tokens.len() as f64)
}

/// Shannon entropy in bits of the empirical token distribution.
pub fn unigram_entropy<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    let n = tokens.len() as f64;
    let mut freqs: Vec<usize> = counts(tokens).into_values().collect();
    // Fixed summation order keeps the result independent of hash order.
    freqs.sort_unstable();
    let h: f64 = freqs
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

fn counts<S: AsRef<str>>(tokens: &[S]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for t in tokens {
        *map.entry(t.as_ref()).or_insert(0) += 1;
    }
    map
}

/// Tokenizes a corpus, samples it, and computes all text statistics on the
/// sample.
pub fn profile(
    corpus: &CorpusSource,
    record: &LanguageRecord,
    target: usize,
    seed: u64,
) -> Result<TextProfile> {
    let tokens = tokenize(&corpus.text);
    if tokens.is_empty() {
        return Err(Error::NoLexicalTokens);
    }
    let sample = sample_contiguous(&tokens, target, seed)?;
    TextProfile::new(
        corpus.iso.clone(),
        mean_word_length(sample.tokens, record.script_scale)?,
        type_token_ratio(sample.tokens)?,
        unigram_entropy(sample.tokens)?,
        sample.tokens.len(),
        sample.offset,
        seed,
    )
}
