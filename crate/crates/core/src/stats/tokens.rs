use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::Shout;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "in", "is", "it", "of",
    "on", "or", "that", "the", "this", "to", "was", "with", "i", "im", "i'm", "my", "we", "so",
    "o", "os", "as", "e", "de", "da", "do", "das", "dos", "em", "no", "na", "nos", "nas", "um",
    "uma", "para", "pra", "com", "que", "por", "se", "eu", "é",
];

pub fn default_stopwords() -> BTreeSet<String> {
    STOPWORDS.iter().map(|s| s.to_string()).collect()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’')
}

/// Lowercased word tokens. Hyphens and apostrophes survive between
/// alphanumerics; `#`/`+` tags, stopwords and numbers of one or two digits
/// are dropped.
pub fn tokenize(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        if word.starts_with(['#', '+']) {
            continue;
        }
        let chars: Vec<char> = word.to_lowercase().chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if c.is_alphanumeric() {
                current.push(c);
            } else if is_joiner(c)
                && !current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
            {
                current.push(if c == '’' { '\'' } else { c });
            } else if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out.retain(|t| {
        let short_number = t.len() <= 2 && t.chars().all(|c| c.is_ascii_digit());
        !short_number && !stopwords.contains(t)
    });
    out
}

/// Maps a token to its radical.
pub trait Stemmer {
    fn stem(&self, token: &str) -> String;
}

impl<F: Fn(&str) -> String> Stemmer for F {
    fn stem(&self, token: &str) -> String {
        self(token)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn stem(&self, token: &str) -> String {
        token.to_string()
    }
}

/// Naive suffix stripping: `ção`/`ções` fold to `ç`, then one of
/// `ing`, `ed`, `es`, `s` is removed when at least three characters remain.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixStemmer;

const MIN_STEM: usize = 3;

impl Stemmer for SuffixStemmer {
    fn stem(&self, token: &str) -> String {
        for suffix in ["ções", "ção"] {
            if let Some(base) = token.strip_suffix(suffix) {
                return format!("{base}ç");
            }
        }
        for suffix in ["ing", "ed", "es", "s"] {
            if let Some(base) = token.strip_suffix(suffix) {
                if base.chars().count() >= MIN_STEM {
                    return base.to_string();
                }
            }
        }
        token.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextOptions {
    pub stopwords: BTreeSet<String>,
    /// Leave lost-timeslot markers and other machine messages out.
    pub exclude_machine: bool,
    /// Leave tags out of the word tokens; they are still tallied apart.
    pub exclude_tags: bool,
}

impl Default for TextOptions {
    fn default() -> Self {
        TextOptions {
            stopwords: default_stopwords(),
            exclude_machine: true,
            exclude_tags: true,
        }
    }
}

/// Token list per shout, in input order.
pub fn shout_tokens<'a, I: IntoIterator<Item = &'a Shout>>(
    shouts: I,
    options: &TextOptions,
) -> Vec<Vec<String>> {
    shouts
        .into_iter()
        .filter(|s| !(options.exclude_machine && s.kind.is_machine()))
        .map(|s| {
            let mut tokens = tokenize(&s.message, &options.stopwords);
            if !options.exclude_tags {
                tokens.extend(s.tags.iter().map(|t| t.to_string()));
            }
            tokens
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTable {
    pub tokens: BTreeMap<String, u64>,
    pub radicals: BTreeMap<String, u64>,
    pub vocabulary_size: usize,
    pub radical_count: usize,
    pub token_count: u64,
}

pub fn token_table<S: Stemmer + ?Sized>(token_lists: &[Vec<String>], stemmer: &S) -> TokenTable {
    let mut table = TokenTable::default();
    for list in token_lists {
        for t in list {
            *table.tokens.entry(t.clone()).or_default() += 1;
        }
    }
    for (token, count) in &table.tokens {
        *table.radicals.entry(stemmer.stem(token)).or_default() += count;
    }
    table.vocabulary_size = table.tokens.len();
    table.radical_count = table.radicals.len();
    table.token_count = table.tokens.values().sum();
    table
}
