//! Character n-gram vocabularies and sparse count matrices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{LabeledWord, Tag};

pub const MAX_N: usize = 4;
const PAD_START: char = '^';
const PAD_END: char = '$';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("n-gram order {0} outside 1..=4")]
    BadOrder(usize),
    #[error("n-gram profile has no orders")]
    EmptyProfile,
    #[error("no n-gram reaches min_count {0}")]
    EmptyVocabulary(usize),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("feature id {id} out of range for {n_cols} columns")]
    BadFeatureId { id: usize, n_cols: usize },
    #[error("feature id {0} listed twice")]
    DuplicateFeatureId(usize),
    #[error("row index {id} out of range for {n_rows} rows")]
    BadRowId { id: usize, n_rows: usize },
    #[error("bad n-gram profile `{0}`")]
    BadProfile(String),
}

/// Which n-gram orders make up a feature universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGramSpec {
    n_values: BTreeSet<usize>,
    pub boundary_padding: bool,
}

impl NGramSpec {
    pub fn new(n_values: impl IntoIterator<Item = usize>, boundary_padding: bool) -> Result<Self, FeatureError> {
        let n_values: BTreeSet<usize> = n_values.into_iter().collect();
        if n_values.is_empty() {
            return Err(FeatureError::EmptyProfile);
        }
        if let Some(&bad) = n_values.iter().find(|&&n| n == 0 || n > MAX_N) {
            return Err(FeatureError::BadOrder(bad));
        }
        Ok(NGramSpec {
            n_values,
            boundary_padding,
        })
    }

    pub fn single(n: usize) -> Result<Self, FeatureError> {
        Self::new([n], false)
    }

    pub fn n_values(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_values.iter().copied()
    }

    /// Human label: `bigram`, `trigram`, or `n2+3` for mixtures.
    pub fn label(&self) -> String {
        let names = ["", "unigram", "bigram", "trigram", "fourgram"];
        let mut s = if self.n_values.len() == 1 {
            names[*self.n_values.iter().next().unwrap()].to_string()
        } else {
            let parts: Vec<String> = self.n_values.iter().map(|n| n.to_string()).collect();
            format!("n{}", parts.join("+"))
        };
        if self.boundary_padding {
            s.push_str("-padded");
        }
        s
    }
}

impl fmt::Display for NGramSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for NGramSpec {
    type Err = FeatureError;

    /// Accepts `2`, `2+3`, the labels produced by [`NGramSpec::label`], and a
    /// `-padded` suffix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FeatureError::BadProfile(s.to_string());
        let (body, padding) = match s.strip_suffix("-padded") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let ns: Vec<usize> = match body {
            "unigram" => vec![1],
            "bigram" => vec![2],
            "trigram" => vec![3],
            "fourgram" => vec![4],
            other => other
                .trim_start_matches('n')
                .split('+')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?,
        };
        NGramSpec::new(ns, padding)
    }
}

/// All contiguous windows of `n` characters, stride one, in word order.
pub fn extract_ngrams(word: &str, n: usize, padding: bool) -> Vec<String> {
    let chars: Vec<char> = if padding {
        std::iter::once(PAD_START)
            .chain(word.chars())
            .chain(std::iter::once(PAD_END))
            .collect()
    } else {
        word.chars().collect()
    };
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

fn word_grams<'a>(word: &'a str, spec: &'a NGramSpec) -> impl Iterator<Item = String> + 'a {
    spec.n_values()
        .flat_map(move |n| extract_ngrams(word, n, spec.boundary_padding))
}

/// Ordered n-gram universe; position in `grams` is the feature id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    spec: NGramSpec,
    grams: Vec<String>,
    index: HashMap<String, usize>,
}

fn gram_order(a: &String, b: &String) -> std::cmp::Ordering {
    a.chars()
        .count()
        .cmp(&b.chars().count())
        .then_with(|| a.cmp(b))
}

impl Vocabulary {
    /// Build from an explicit gram list; the list is put in canonical order.
    pub fn from_grams(spec: NGramSpec, grams: impl IntoIterator<Item = String>) -> Self {
        let mut grams: Vec<String> = grams.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        grams.sort_by(gram_order);
        let index = grams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        Vocabulary { spec, grams, index }
    }

    pub fn spec(&self) -> &NGramSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    pub fn gram(&self, id: usize) -> Option<&str> {
        self.grams.get(id).map(String::as_str)
    }

    pub fn id(&self, gram: &str) -> Option<usize> {
        self.index.get(gram).copied()
    }

    /// One gram per line, line number (from zero) is the feature id.
    pub fn to_text(&self) -> String {
        self.grams.iter().map(|g| format!("{g}\n")).collect()
    }
}

pub fn build_vocabulary(
    corpus: &[LabeledWord],
    spec: &NGramSpec,
    min_count: usize,
) -> Result<Vocabulary, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut freq: HashMap<String, usize> = HashMap::new();
    for w in corpus {
        for g in word_grams(&w.surface, spec) {
            *freq.entry(g).or_insert(0) += 1;
        }
    }
    let kept = freq
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .map(|(g, _)| g);
    let vocab = Vocabulary::from_grams(spec.clone(), kept);
    if vocab.is_empty() {
        return Err(FeatureError::EmptyVocabulary(min_count));
    }
    Ok(vocab)
}

/// Sparse instance × feature count matrix in row-major compressed form,
/// with the aligned label vector. Within a row, columns are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    counts: Vec<u32>,
    labels: Vec<Tag>,
}

impl FeatureMatrix {
    /// Build from (row, col, count) triples. Duplicate cells are summed and
    /// zero counts dropped.
    pub fn from_triples(
        n_rows: usize,
        n_cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, u32)>,
        labels: Vec<Tag>,
    ) -> Result<Self, FeatureError> {
        assert_eq!(labels.len(), n_rows, "labels must align with rows");
        let mut rows: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n_rows];
        for (r, c, v) in triples {
            if r >= n_rows {
                return Err(FeatureError::BadRowId { id: r, n_rows });
            }
            if c >= n_cols {
                return Err(FeatureError::BadFeatureId { id: c, n_cols });
            }
            rows[r].push((c, v));
        }
        let mut m = FeatureMatrix::empty(n_cols, labels);
        for row in &mut rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut merged: Vec<(usize, u32)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            m.push_row(merged.into_iter().filter(|e| e.1 > 0));
        }
        Ok(m)
    }

    pub fn from_dense(dense: &[Vec<u32>], labels: Vec<Tag>) -> Self {
        let n_cols = dense.first().map_or(0, Vec::len);
        let mut m = FeatureMatrix::empty(n_cols, labels);
        for row in dense {
            assert_eq!(row.len(), n_cols, "ragged dense matrix");
            m.push_row(row.iter().enumerate().filter(|e| *e.1 > 0).map(|(c, &v)| (c, v)));
        }
        assert_eq!(m.n_rows(), m.labels.len(), "labels must align with rows");
        m
    }

    fn empty(n_cols: usize, labels: Vec<Tag>) -> Self {
        FeatureMatrix {
            n_cols,
            row_ptr: vec![0],
            cols: Vec::new(),
            counts: Vec::new(),
            labels,
        }
    }

    fn push_row(&mut self, entries: impl Iterator<Item = (usize, u32)>) {
        for (c, v) in entries {
            self.cols.push(c);
            self.counts.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn labels(&self) -> &[Tag] {
        &self.labels
    }

    /// `(col, count)` pairs of one row, columns ascending.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.counts[span].iter().copied())
    }

    pub fn row_sum(&self, r: usize) -> u64 {
        self.counts[self.row_ptr[r]..self.row_ptr[r + 1]]
            .iter()
            .map(|&v| v as u64)
            .sum()
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.row(r).find(|e| e.0 == c).map_or(0, |e| e.1)
    }

    /// `(row, col, count)` triples sorted by (row, col).
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n_rows()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut dense = vec![vec![0; self.n_cols]; self.n_rows()];
        for (r, c, v) in self.triples() {
            dense[r][c] = v;
        }
        dense
    }

    /// Column-major view: for each column, its `(row, count)` entries.
    pub fn columns(&self) -> Vec<Vec<(usize, u32)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, c, v) in self.triples() {
            cols[c].push((r, v));
        }
        cols
    }

    /// Keep the listed columns, renumbered `0..keep.len()` in `keep` order.
    pub fn project_columns(&self, keep: &[usize]) -> Result<FeatureMatrix, FeatureError> {
        let mut remap = vec![usize::MAX; self.n_cols];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.n_cols {
                return Err(FeatureError::BadFeatureId {
                    id: old,
                    n_cols: self.n_cols,
                });
            }
            if remap[old] != usize::MAX {
                return Err(FeatureError::DuplicateFeatureId(old));
            }
            remap[old] = new;
        }
        let mut m = FeatureMatrix::empty(keep.len(), self.labels.clone());
        let mut buf = Vec::new();
        for r in 0..self.n_rows() {
            buf.clear();
            buf.extend(
                self.row(r)
                    .filter(|&(c, _)| remap[c] != usize::MAX)
                    .map(|(c, v)| (remap[c], v)),
            );
            buf.sort_unstable_by_key(|e| e.0);
            m.push_row(buf.iter().copied());
        }
        Ok(m)
    }

    /// Keep the listed rows in the given order (repeats allowed).
    pub fn take_rows(&self, rows: &[usize]) -> Result<FeatureMatrix, FeatureError> {
        let n_rows = self.n_rows();
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= n_rows {
                return Err(FeatureError::BadRowId { id: r, n_rows });
            }
            labels.push(self.labels[r]);
        }
        let mut m = FeatureMatrix::empty(self.n_cols, labels);
        for &r in rows {
            let entries: Vec<_> = self.row(r).collect();
            m.push_row(entries.into_iter());
        }
        Ok(m)
    }

    pub fn with_labels(&self, labels: Vec<Tag>) -> FeatureMatrix {
        assert_eq!(labels.len(), self.n_rows(), "labels must align with rows");
        FeatureMatrix {
            labels,
            ..self.clone()
        }
    }

    /// Coordinate-format dump, one `row col count` line per stored entry.
    pub fn to_coordinate_text(&self) -> String {
        self.triples().map(|(r, c, v)| format!("{r} {c} {v}\n")).collect()
    }
}

/// Row `i` counts the vocabulary grams of word `i`; grams missing from the
/// vocabulary are ignored.
pub fn featurize(corpus: &[LabeledWord], vocab: &Vocabulary) -> FeatureMatrix {
    let labels = corpus.iter().map(|w| w.tag).collect();
    let mut m = FeatureMatrix::empty(vocab.len(), labels);
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for w in corpus {
        counts.clear();
        for g in word_grams(&w.surface, vocab.spec()) {
            if let Some(id) = vocab.id(&g) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(usize, u32)> = counts.iter().map(|(&c, &v)| (c, v)).collect();
        entries.sort_unstable_by_key(|e| e.0);
        m.push_row(entries.into_iter());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(ws: &[&str]) -> Vec<LabeledWord> {
        ws.iter()
            .map(|w| LabeledWord {
                surface: w.to_string(),
                tag: Tag::Hi,
                occurrence_count: 1,
            })
            .collect()
    }

    #[test]
    fn sliding_windows() {
        assert_eq!(extract_ngrams("khelna", 2, false), vec!["kh", "he", "el", "ln", "na"]);
        assert!(extract_ngrams("a", 2, false).is_empty());
        assert_eq!(extract_ngrams("go", 1, false), vec!["g", "o"]);
        assert_eq!(extract_ngrams("a", 2, true), vec!["^a", "a$"]);
    }

    #[test]
    fn spec_validation() {
        assert_eq!(NGramSpec::new([], false), Err(FeatureError::EmptyProfile));
        assert_eq!(NGramSpec::new([5], false), Err(FeatureError::BadOrder(5)));
        assert_eq!(NGramSpec::new([3, 2, 3], false).unwrap().n_values().count(), 2);
        assert_eq!("2".parse::<NGramSpec>().unwrap().label(), "bigram");
        assert_eq!("2+3".parse::<NGramSpec>().unwrap().label(), "n2+3");
        assert_eq!("n2+3".parse::<NGramSpec>().unwrap(), "3+2".parse().unwrap());
        assert!("x".parse::<NGramSpec>().is_err());
    }

    #[test]
    fn vocabulary_basic() {
        let spec = NGramSpec::single(2).unwrap();
        let v = build_vocabulary(&words(&["go", "to"]), &spec, 1).unwrap();
        assert_eq!(v.grams(), &["go".to_string(), "to".to_string()]);
        assert_eq!(
            build_vocabulary(&words(&["go"]), &spec, 2),
            Err(FeatureError::EmptyVocabulary(2))
        );
    }

    #[test]
    fn vocabulary_order_is_length_then_lexicographic() {
        let spec = NGramSpec::new([1, 2], false).unwrap();
        let v = build_vocabulary(&words(&["ba"]), &spec, 1).unwrap();
        assert_eq!(v.grams(), &["a", "b", "ba"]);
        assert_eq!(v.id("ba"), Some(2));
        assert_eq!(v.to_text(), "a\nb\nba\n");
    }

    #[test]
    fn na_frequency_counts_words() {
        let spec = NGramSpec::single(2).unwrap();
        let corpus = words(&["khelna", "chalna", "jana", "tax"]);
        let v = build_vocabulary(&corpus, &spec, 3).unwrap();
        // brute force: number of windows equal to "na" across the corpus
        let brute = corpus
            .iter()
            .map(|w| w.surface.as_bytes().windows(2).filter(|p| p == b"na").count())
            .sum::<usize>();
        assert_eq!(brute, 3);
        assert_eq!(v.grams(), &["na".to_string()]);
    }

    #[test]
    fn featurize_overlapping_counts() {
        let spec = NGramSpec::single(2).unwrap();
        let vocab = Vocabulary::from_grams(spec, ["na".to_string(), "an".to_string()]);
        let m = featurize(&words(&["nana", "xyz"]), &vocab);
        assert_eq!(m.get(0, vocab.id("na").unwrap()), 2);
        assert_eq!(m.get(0, vocab.id("an").unwrap()), 1);
        assert_eq!(m.row(1).count(), 0);
        assert_eq!(m.to_dense(), vec![vec![1, 2], vec![0, 0]]);
        assert_eq!(m.labels(), &[Tag::Hi, Tag::Hi]);
    }

    #[test]
    fn projection_cases() {
        let m = FeatureMatrix::from_dense(&[vec![1, 0, 3], vec![0, 2, 4]], vec![Tag::En, Tag::Hi]);
        assert_eq!(m.project_columns(&[0, 1, 2]).unwrap(), m);
        let none = m.project_columns(&[]).unwrap();
        assert_eq!(none.n_cols(), 0);
        assert_eq!(none.nnz(), 0);
        assert_eq!(none.n_rows(), 2);
        let p = m.project_columns(&[2, 0]).unwrap();
        assert_eq!(p.to_dense(), vec![vec![3, 1], vec![4, 0]]);
        assert_eq!(p.labels(), m.labels());
        assert_eq!(
            m.project_columns(&[3]),
            Err(FeatureError::BadFeatureId { id: 3, n_cols: 3 })
        );
        assert_eq!(m.project_columns(&[1, 1]), Err(FeatureError::DuplicateFeatureId(1)));
    }

    #[test]
    fn triples_roundtrip_and_coordinates() {
        let m = FeatureMatrix::from_triples(2, 3, [(1, 2, 1), (0, 1, 2), (1, 2, 1)], vec![Tag::En, Tag::Ne])
            .unwrap();
        assert_eq!(m.to_dense(), vec![vec![0, 2, 0], vec![0, 0, 2]]);
        assert_eq!(m.to_coordinate_text(), "0 1 2\n1 2 2\n");
    }

    proptest! {
        #[test]
        fn window_count(word in "[a-z]{1,12}", n in 1usize..=4) {
            let got = extract_ngrams(&word, n, false).len();
            prop_assert_eq!(got, (word.len() + 1).saturating_sub(n));
        }

        #[test]
        fn row_sums_match_window_counts(ws in proptest::collection::vec("[a-e]{4,8}", 1..12), mix in 0usize..3) {
            let spec = match mix { 0 => NGramSpec::single(2), 1 => NGramSpec::new([1, 3], false), _ => NGramSpec::new([2, 3, 4], false) }.unwrap();
            let corpus: Vec<LabeledWord> = ws.iter().map(|w| LabeledWord { surface: w.clone(), tag: Tag::En, occurrence_count: 1 }).collect();
            let vocab = build_vocabulary(&corpus, &spec, 1).unwrap();
            let m = featurize(&corpus, &vocab);
            for (i, w) in ws.iter().enumerate() {
                let expected: usize = spec.n_values().map(|n| extract_ngrams(w, n, false).len()).sum();
                prop_assert_eq!(m.row_sum(i) as usize, expected);
            }
            let mut rev = corpus.clone();
            rev.reverse();
            prop_assert_eq!(build_vocabulary(&rev, &spec, 1).unwrap(), vocab);
        }

        #[test]
        fn nested_projection_composes(
            dense in proptest::collection::vec(proptest::collection::vec(0u32..3, 6), 1..6),
            outer in Just(()).prop_flat_map(|_| Just(vec![5usize, 0, 3, 2])),
            inner in proptest::sample::subsequence(vec![0usize, 1, 2, 3], 0..=4).prop_shuffle(),
        ) {
            let labels = vec![Tag::En; dense.len()];
            let m = FeatureMatrix::from_dense(&dense, labels);
            let twice = m.project_columns(&outer).unwrap().project_columns(&inner).unwrap();
            let composed: Vec<usize> = inner.iter().map(|&i| outer[i]).collect();
            prop_assert_eq!(twice, m.project_columns(&composed).unwrap());
        }
    }
}
