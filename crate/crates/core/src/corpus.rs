//! Tweet preprocessing, word-level annotation loading and corpus assembly.
//!
//! The pipeline turns raw tweets into lowercase ASCII word tokens, and turns
//! annotated `surface<TAB>tag` files into a deduplicated list of
//! [`LabeledWord`]s together with [`CorpusStats`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

/// English stopword list bundled with the crate, one word per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("surface `{surface}` carries conflicting tags {first} and {second}")]
    ConflictingLabel {
        surface: String,
        first: Tag,
        second: Tag,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Word-level language tag. The declaration order is the canonical class
/// order used to break every tie (EN < HI < NE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// English word.
    En,
    /// Transliterated (Roman-script) Hindi word.
    Hi,
    /// Named entity, the "Other" class.
    Ne,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::En, Tag::Hi, Tag::Ne];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Tag> {
        Tag::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::En => "EN",
            Tag::Hi => "HI",
            Tag::Ne => "NE",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown tag `{0}` (expected EN, HI or NE)")]
pub struct UnknownTag(pub String);

impl FromStr for Tag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "EN" => Ok(Tag::En),
            "HI" => Ok(Tag::Hi),
            "NE" => Ok(Tag::Ne),
            other => Err(UnknownTag(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
}

/// A unique word type with its resolved tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledWord {
    pub surface: String,
    pub tag: Tag,
    pub occurrence_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub total_tokens: usize,
    pub unique_words: usize,
    pub per_tag_counts: BTreeMap<Tag, usize>,
    pub removed_redundant: usize,
}

impl CorpusStats {
    pub fn tag_count(&self, tag: Tag) -> usize {
        self.per_tag_counts.get(&tag).copied().unwrap_or(0)
    }

    /// `key=value` report, one pair per line.
    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("total_tokens={}\n", self.total_tokens));
        out.push_str(&format!("unique_words={}\n", self.unique_words));
        out.push_str(&format!("removed_redundant={}\n", self.removed_redundant));
        for tag in Tag::ALL {
            out.push_str(&format!("tag_{}={}\n", tag, self.tag_count(tag)));
        }
        out
    }
}

/// How to resolve a surface that was annotated with more than one tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPolicy {
    /// Keep the most frequent tag; ties go to the canonically first tag.
    #[default]
    Majority,
    /// Reject the corpus.
    Strict,
}

pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(parse_stopwords(&text))
}

fn is_url(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.contains("http") || lower.contains("www.") || lower.contains("://")
}

/// Normalize one tweet into word tokens.
///
/// Rules, applied per whitespace token in order: URLs and `@` handles are
/// dropped and every character that is not a letter or digit is removed
/// (this covers emoticons and punctuation); tokens with non-ASCII letters or
/// digits are dropped; a hashtag keeps its body; the token is lowercased;
/// stopwords are dropped.
pub fn preprocess_tweet(raw: &RawTweet, stopwords: &HashSet<String>) -> Vec<String> {
    preprocess_text(&raw.text, stopwords)
}

pub fn preprocess_text(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        if token.starts_with('@') || is_url(token) {
            continue;
        }
        // `#` is not alphanumeric, so the hashtag body survives on its own.
        let cleaned: String = token.chars().filter(|c| c.is_alphanumeric()).collect();
        if cleaned.is_empty() || !cleaned.chars().all(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        let lower = cleaned.to_ascii_lowercase();
        if lower.contains("http") || stopwords.contains(&lower) {
            continue;
        }
        out.push(lower);
    }
    out
}

/// Read raw tweets: either one tweet per line, or JSON lines with `id` and
/// `text`. Blank lines are skipped and counted.
pub fn load_raw_tweets(path: &Path, jsonl: bool) -> Result<(Vec<RawTweet>, usize), CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_raw_tweets(&text, jsonl)
}

pub fn parse_raw_tweets(text: &str, jsonl: bool) -> Result<(Vec<RawTweet>, usize), CorpusError> {
    let mut tweets = Vec::new();
    let mut skipped = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            skipped += 1;
            continue;
        }
        let tweet = if jsonl {
            let t: RawTweet = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if t.text.trim().is_empty() {
                skipped += 1;
                continue;
            }
            t
        } else {
            RawTweet {
                id: (i + 1).to_string(),
                text: line.to_string(),
            }
        };
        tweets.push(tweet);
    }
    Ok((tweets, skipped))
}

/// Parse `surface<TAB>tag` lines. Lines starting with `#` and blank lines
/// are skipped. Surfaces are ASCII-lowercased and must then match `[a-z]+`.
pub fn parse_annotated_tsv(text: &str) -> Result<Vec<(String, Tag)>, CorpusError> {
    let mut words = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| CorpusError::Parse {
            line: line_no,
            reason,
        };
        let mut fields = line.split('\t');
        let (surface, tag) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(t), None) => (s, t.trim_end_matches('\r')),
            _ => return Err(parse_err("expected `surface<TAB>tag`".into())),
        };
        let surface = surface.to_ascii_lowercase();
        if surface.is_empty() || !surface.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(parse_err(format!("surface `{surface}` is not in [a-z]+")));
        }
        let tag: Tag = tag.parse().map_err(|e: UnknownTag| parse_err(e.to_string()))?;
        words.push((surface, tag));
    }
    Ok(words)
}

pub fn load_annotated_tsv(path: &Path) -> Result<Vec<(String, Tag)>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_annotated_tsv(&text)
}

/// Deduplicate annotated tokens into unique words, sorted by surface.
pub fn build_labeled_corpus(
    words: &[(String, Tag)],
    policy: LabelPolicy,
) -> Result<(Vec<LabeledWord>, CorpusStats), CorpusError> {
    // surface -> per-tag occurrence counts
    let mut groups: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for (surface, tag) in words {
        let counts = groups.entry(surface.as_str()).or_insert([0; 3]);
        if policy == LabelPolicy::Strict {
            if let Some(first) = Tag::ALL.into_iter().find(|t| counts[t.index()] > 0) {
                if first != *tag {
                    return Err(CorpusError::ConflictingLabel {
                        surface: surface.clone(),
                        first,
                        second: *tag,
                    });
                }
            }
        }
        counts[tag.index()] += 1;
    }

    let mut stats = CorpusStats {
        total_tokens: words.len(),
        ..CorpusStats::default()
    };
    let mut out = Vec::with_capacity(groups.len());
    for (surface, counts) in groups {
        let mut best = Tag::En;
        for tag in Tag::ALL {
            if counts[tag.index()] > counts[best.index()] {
                best = tag;
            }
        }
        let occurrences: usize = counts.iter().sum();
        stats.removed_redundant += occurrences - 1;
        *stats.per_tag_counts.entry(best).or_insert(0) += 1;
        out.push(LabeledWord {
            surface: surface.to_string(),
            tag: best,
            occurrence_count: occurrences,
        });
    }
    stats.unique_words = out.len();
    Ok((out, stats))
}
