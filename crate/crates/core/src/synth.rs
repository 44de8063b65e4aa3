//! Seeded generator for a synthetic code-mixed word corpus.
//!
//! Every ordered letter pair is assigned either to one class or to a shared
//! pool. Each class has an inventory of short morphemes whose letter pairs
//! all belong to that class; a word is one class morpheme wrapped in optional
//! filler made of shared pairs, sometimes followed by a class suffix
//! (`ing`/`tion`/`th` for English, `na`/`ta`/`ko` for Hindi, place and
//! person endings for named entities). Evidence is spread over many rare
//! n-grams, so accuracy keeps growing as more features are selected.
//!
//! The generator also writes a manifest of the counts it produced, which
//! the `stats` report must reproduce exactly.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Tag;

pub const DEFAULT_SEED: u64 = 2019;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub english: usize,
    pub hindi: usize,
    pub named_entities: usize,
    /// Chance of each extra occurrence of a word (geometric repeats).
    pub repeat_percent: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: DEFAULT_SEED,
            english: 1000,
            hindi: 600,
            named_entities: 400,
            repeat_percent: 35,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthCorpus {
    /// Token stream in file order, repeats included.
    pub tokens: Vec<(String, Tag)>,
    pub manifest: Manifest,
}

/// Counts recorded while generating, independent of corpus loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub seed: u64,
    pub total_tokens: usize,
    pub unique_words: usize,
    pub removed_redundant: usize,
    pub per_tag: [usize; 3],
}

impl Manifest {
    /// Same keys as the `stats` report, preceded by a seed comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("# synthetic corpus manifest seed={}\n", self.seed);
        out.push_str(&format!("total_tokens={}\n", self.total_tokens));
        out.push_str(&format!("unique_words={}\n", self.unique_words));
        out.push_str(&format!("removed_redundant={}\n", self.removed_redundant));
        for tag in Tag::ALL {
            out.push_str(&format!("tag_{}={}\n", tag, self.per_tag[tag.index()]));
        }
        out
    }
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
/// Share of letter pairs usable by every class.
const SHARED_PAIRS: f64 = 0.2;
/// Morpheme draws per class; duplicates are dropped.
const INVENTORY: [usize; 3] = [400, 240, 160];
const FILLER_PROB: f64 = 0.7;
const SUFFIX_PROB: f64 = 0.2;

const SUFFIXES: [&[&str]; 3] = [
    &["ing", "tion", "th", "ed", "er", "ly"],
    &["na", "ta", "ko", "ne", "ki", "ka"],
    &["pur", "abad", "esh", "raj", "deep", "garh"],
];

/// Owner of each ordered letter pair: `Some(tag)` or `None` for shared.
/// Suffix pairs always belong to their class, so no word carries evidence
/// for another class.
struct PairTable([[Option<Tag>; 26]; 26]);

impl PairTable {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut t = [[None; 26]; 26];
        for row in t.iter_mut() {
            for cell in row.iter_mut() {
                let u: f64 = rng.gen();
                if u >= SHARED_PAIRS {
                    let i = ((u - SHARED_PAIRS) / (1.0 - SHARED_PAIRS) * 3.0) as usize;
                    *cell = Some(Tag::ALL[i.min(2)]);
                }
            }
        }
        for tag in Tag::ALL {
            for suffix in SUFFIXES[tag.index()] {
                for p in suffix.as_bytes().windows(2) {
                    t[usize::from(p[0] - b'a')][usize::from(p[1] - b'a')] = Some(tag);
                }
            }
        }
        PairTable(t)
    }

    fn owner(&self, a: u8, b: u8) -> Option<Tag> {
        self.0[usize::from(a - b'a')][usize::from(b - b'a')]
    }

    /// Random walk of `len` letters whose pairs all belong to `class`.
    fn walk(&self, rng: &mut ChaCha8Rng, class: Option<Tag>, len: usize) -> String {
        'retry: loop {
            let mut w = vec![*LETTERS.choose(rng).expect("letters")];
            while w.len() < len {
                let last = w[w.len() - 1];
                let next: Vec<u8> = LETTERS.iter().copied().filter(|&c| self.owner(last, c) == class).collect();
                match next.choose(rng) {
                    Some(&c) => w.push(c),
                    None => continue 'retry,
                }
            }
            return String::from_utf8(w).expect("ascii");
        }
    }

    /// Every pair is shared or owned by `tag`.
    fn legal(&self, w: &str, tag: Tag) -> bool {
        w.as_bytes().windows(2).all(|p| self.owner(p[0], p[1]).map_or(true, |o| o == tag))
    }
}

fn filler(rng: &mut ChaCha8Rng, pairs: &PairTable) -> String {
    if rng.gen_bool(FILLER_PROB) {
        let len = rng.gen_range(1..=3);
        pairs.walk(rng, None, len)
    } else {
        String::new()
    }
}

fn make_word(rng: &mut ChaCha8Rng, pairs: &PairTable, inventory: &[String], tag: Tag) -> String {
    loop {
        let pre = filler(rng, pairs);
        let core = inventory.choose(rng).expect("non-empty inventory");
        let post = filler(rng, pairs);
        let suffix = if rng.gen_bool(SUFFIX_PROB) {
            SUFFIXES[tag.index()].choose(rng).expect("suffixes")
        } else {
            ""
        };
        let w = format!("{pre}{core}{post}{suffix}");
        if pairs.legal(&w, tag) {
            return w;
        }
    }
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs = PairTable::random(&mut rng);
    let inventories: Vec<Vec<String>> = Tag::ALL
        .iter()
        .map(|&tag| {
            let mut inv: Vec<String> = Vec::new();
            for _ in 0..INVENTORY[tag.index()] {
                let len = rng.gen_range(3..=4);
                let m = pairs.walk(&mut rng, Some(tag), len);
                if !inv.contains(&m) {
                    inv.push(m);
                }
            }
            inv
        })
        .collect();
    let mut seen: HashSet<String> = HashSet::new();
    let mut uniques: Vec<(String, Tag)> = Vec::new();
    for (tag, target) in [(Tag::En, config.english), (Tag::Hi, config.hindi), (Tag::Ne, config.named_entities)] {
        let mut made = 0;
        while made < target {
            let w = make_word(&mut rng, &pairs, &inventories[tag.index()], tag);
            if w.len() < 3 || w.len() > 14 || !seen.insert(w.clone()) {
                continue;
            }
            uniques.push((w, tag));
            made += 1;
        }
    }
    let repeat = f64::from(config.repeat_percent.min(95)) / 100.0;
    let mut tokens = Vec::new();
    for (w, tag) in &uniques {
        tokens.push((w.clone(), *tag));
        while rng.gen_bool(repeat) {
            tokens.push((w.clone(), *tag));
        }
    }
    tokens.shuffle(&mut rng);

    let mut per_tag = [0; 3];
    for (_, tag) in &uniques {
        per_tag[tag.index()] += 1;
    }
    let manifest = Manifest {
        seed: config.seed,
        total_tokens: tokens.len(),
        unique_words: uniques.len(),
        removed_redundant: tokens.len() - uniques.len(),
        per_tag,
    };
    SynthCorpus { tokens, manifest }
}

impl SynthCorpus {
    /// Annotated TSV with a comment header.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "# synthetic code-mixed word corpus seed={} tokens={}\n",
            self.manifest.seed, self.manifest.total_tokens
        );
        for (w, t) in &self.tokens {
            out.push_str(&format!("{w}\t{t}\n"));
        }
        out
    }
}
