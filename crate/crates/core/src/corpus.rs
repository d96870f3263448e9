//! Text ingestion: tokenization, stop-word filtering and frequency counting.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords/english.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read word list {path}: {source}")]
    WordList {
        path: String,
        source: std::io::Error,
    },
    #[error("no bundled stop-word list for language {0:?}; pass one explicitly")]
    UnsupportedLanguage(String),
    #[error("stop-word list is empty")]
    EmptyStopwords,
    #[error("max-words must be at least 1")]
    ZeroMaxWords,
}

#[derive(Debug, Clone)]
pub struct TokenFilterConfig {
    pub language: String,
    pub stopwords: HashSet<String>,
    /// Surrogate for part-of-speech filtering: when set, only these words survive.
    pub keep_lexicon: Option<HashSet<String>>,
    pub strip_symbols_and_numbers: bool,
    pub max_words: usize,
}

impl TokenFilterConfig {
    /// Bundled stop words for `language` (only `en` ships).
    pub fn for_language(language: &str, max_words: usize) -> Result<Self, CorpusError> {
        let stopwords = match language {
            "en" | "english" => parse_word_list(ENGLISH_STOPWORDS),
            other => return Err(CorpusError::UnsupportedLanguage(other.to_string())),
        };
        Self::with_stopwords(language, stopwords, max_words)
    }

    pub fn with_stopwords(
        language: &str,
        stopwords: HashSet<String>,
        max_words: usize,
    ) -> Result<Self, CorpusError> {
        if stopwords.is_empty() {
            return Err(CorpusError::EmptyStopwords);
        }
        if max_words == 0 {
            return Err(CorpusError::ZeroMaxWords);
        }
        Ok(TokenFilterConfig {
            language: language.to_string(),
            stopwords,
            keep_lexicon: None,
            strip_symbols_and_numbers: true,
            max_words,
        })
    }

    /// No stop words, no lexicon; symbols and numbers are still dropped.
    pub fn unfiltered(max_words: usize) -> Self {
        TokenFilterConfig {
            language: String::new(),
            stopwords: HashSet::new(),
            keep_lexicon: None,
            strip_symbols_and_numbers: true,
            max_words: max_words.max(1),
        }
    }
}

/// A surviving word with its occurrence count and, once attached, its vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordEntry {
    pub surface: String,
    pub count: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vector: Option<Vec<f64>>,
}

impl WordEntry {
    pub fn new(surface: impl Into<String>, count: u32) -> Self {
        WordEntry {
            surface: surface.into(),
            count,
            vector: None,
        }
    }
}

/// Reads a word-per-line file; blank lines and `#` comments are ignored.
pub fn read_word_list(path: &Path) -> Result<HashSet<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::WordList {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_word_list(&text))
}

pub fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '-'
}

/// Lowercases, splits on anything that is neither alphabetic nor a hyphen,
/// trims edge hyphens and applies the filters of `config`.
pub fn tokenize(text: &str, config: &TokenFilterConfig) -> Vec<String> {
    // Lowercase first: case mapping can emit non-alphabetic combining marks.
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !is_word_char(c))
        .map(|t| t.trim_matches('-'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .filter(|t| {
            // hyphen-only runs were trimmed away above; a token here has a letter
            !(config.strip_symbols_and_numbers && !t.chars().any(char::is_alphabetic))
        })
        .filter(|t| !config.stopwords.contains(t))
        .filter(|t| config.keep_lexicon.as_ref().is_none_or(|lex| lex.contains(t)))
        .collect()
}

/// One entry per distinct token, most frequent first (ties lexicographic),
/// capped at `config.max_words`.
pub fn count_words(tokens: &[String], config: &TokenFilterConfig) -> Vec<WordEntry> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut entries: Vec<WordEntry> = counts
        .into_iter()
        .map(|(w, c)| WordEntry::new(w, c))
        .collect();
    // BTreeMap order is lexicographic, and the sort is stable.
    entries.sort_by(|a, b| b.count.cmp(&a.count));
    entries.truncate(config.max_words);
    entries
}
