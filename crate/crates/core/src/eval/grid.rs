//! The selector × classifier × n-gram profile × k experiment grid.
//!
//! Per profile the vocabulary and training matrix are built from the
//! training split only. Each selector then runs once per profile up to the
//! largest k and yields the smaller subsets on the way (top-k prefixes,
//! forward-selection prefixes, elimination checkpoints), so every k of a
//! curve comes from the same run. Cells train and score a classifier on
//! the projected matrices.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use super::split::{holdout, HoldoutSplit, SplitError, SplitPlan};
use crate::classify::{self, accuracy, ClassifierSpec};
use crate::corpus::LabeledWord;
use crate::ngram::{build_vocabulary, featurize, FeatureMatrix, NGramSpec, Vocabulary};
use crate::select::chi2::{chi_square_scores, select_top_k_with};
use crate::select::{
    elimination_path, forward_select_path, SelectionError, SelectionResult, SelectorConfig, SelectorMethod,
};

pub const DEFAULT_K_VALUES: [usize; 6] = [50, 150, 250, 350, 450, 550];

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid has an empty axis: {0}")]
    EmptyAxis(&'static str),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("cannot start worker pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub selectors: Vec<SelectorMethod>,
    pub classifiers: Vec<ClassifierSpec>,
    pub profiles: Vec<NGramSpec>,
    pub k_values: Vec<usize>,
    pub plan: SplitPlan,
    /// Global seed; selection and cell seeds are derived from it.
    pub seed: u64,
    pub min_count: usize,
    /// Forward-selection candidate pool; `None` means `10 · max k`.
    pub forward_pool: Option<usize>,
    /// Classifier scored inside the forward-selection wrapper.
    pub forward_wrapper: ClassifierSpec,
    pub rfe_step: usize,
    pub objective_folds: usize,
    pub record_timing: bool,
    /// Worker threads; `None` uses the rayon default, `Some(1)` is serial.
    pub threads: Option<usize>,
}

impl GridConfig {
    /// All selectors and classifiers with default settings, bigram and
    /// trigram profiles, k from 50 to 550.
    pub fn new() -> Self {
        GridConfig {
            selectors: SelectorMethod::ALL.to_vec(),
            classifiers: vec![
                ClassifierSpec::naive_bayes(),
                ClassifierSpec::logistic_regression(),
                ClassifierSpec::decision_tree(),
            ],
            profiles: vec![
                NGramSpec::single(2).expect("valid order"),
                NGramSpec::single(3).expect("valid order"),
            ],
            k_values: DEFAULT_K_VALUES.to_vec(),
            plan: SplitPlan::default(),
            seed: 42,
            min_count: 1,
            forward_pool: None,
            forward_wrapper: ClassifierSpec::naive_bayes(),
            rfe_step: 50,
            objective_folds: 3,
            record_timing: false,
            threads: None,
        }
    }

    /// One-line summary of every setting that affects the results.
    pub fn describe(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        format!(
            "seed={} split={} min_count={} selectors={} classifiers={} profiles={} k={} forward_pool={} forward_wrapper={} rfe_step={} folds={}",
            self.seed,
            self.plan.describe(),
            self.min_count,
            join(self.selectors.iter().map(|s| s.to_string()).collect()),
            join(self.classifiers.iter().map(|c| c.describe()).collect()),
            join(self.profiles.iter().map(|p| p.label()).collect()),
            join(self.k_values.iter().map(|k| k.to_string()).collect()),
            self.forward_pool.map_or("10k".to_string(), |m| m.to_string()),
            self.forward_wrapper.describe(),
            self.rfe_step,
            self.objective_folds
        )
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::new()
    }
}

/// One grid cell. `k` is the requested size; `selector.k` is the size
/// actually used after clamping to the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub ngram_profile: NGramSpec,
    pub selector: SelectorConfig,
    pub classifier: ClassifierSpec,
    pub k: usize,
    pub accuracy: Option<f64>,
    /// Seconds spent training and scoring the cell, when timing is on.
    pub wall_time: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

/// Selector output for one (profile, selector) pair, one result per k.
#[derive(Debug, Clone)]
pub struct GridSelection {
    pub profile: NGramSpec,
    pub method: SelectorMethod,
    pub vocabulary: Option<Vocabulary>,
    pub results: Result<Vec<SelectionResult>, String>,
}

#[derive(Debug, Clone)]
pub struct GridOutput {
    pub records: Vec<ExperimentRecord>,
    pub selections: Vec<GridSelection>,
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed for a grid coordinate, independent of scheduling.
pub fn derive_seed(global: u64, coordinates: &[&str]) -> u64 {
    let mut h = mix(global);
    for c in coordinates {
        // FNV-1a over the coordinate, then mixed into the running state
        let mut f: u64 = 0xcbf2_9ce4_8422_2325;
        for b in c.bytes() {
            f = (f ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
        }
        h = mix(h ^ f);
    }
    h
}

pub fn run_grid(corpus: &[LabeledWord], config: &GridConfig) -> Result<GridOutput, GridError> {
    let labels: Vec<_> = corpus.iter().map(|w| w.tag).collect();
    let split = holdout(&labels, &config.plan)?;
    run_grid_with_split(corpus, &split, config)
}

struct Prepared {
    vocabulary: Vocabulary,
    train: FeatureMatrix,
    test: FeatureMatrix,
    /// Requested k → effective k.
    effective: Vec<usize>,
}

fn prepare(
    corpus: &[LabeledWord],
    split: &HoldoutSplit,
    profile: &NGramSpec,
    config: &GridConfig,
) -> Result<Prepared, String> {
    let train_words: Vec<LabeledWord> = split.train.iter().map(|&i| corpus[i].clone()).collect();
    let test_words: Vec<LabeledWord> = split.test.iter().map(|&i| corpus[i].clone()).collect();
    let vocabulary = build_vocabulary(&train_words, profile, config.min_count).map_err(|e| e.to_string())?;
    let effective = config
        .k_values
        .iter()
        .map(|&k| {
            if k > vocabulary.len() {
                log::warn!(
                    "profile {}: k = {k} exceeds the vocabulary of {}, clamping",
                    profile.label(),
                    vocabulary.len()
                );
            }
            k.min(vocabulary.len())
        })
        .collect();
    Ok(Prepared {
        train: featurize(&train_words, &vocabulary),
        test: featurize(&test_words, &vocabulary),
        vocabulary,
        effective,
    })
}

fn selection_seed(config: &GridConfig, profile: &NGramSpec, method: SelectorMethod) -> u64 {
    derive_seed(config.seed, &[&profile.label(), method.short_name()])
}

/// Selector results for each entry of `ks` (which may repeat after clamping).
fn select_path(
    x: &FeatureMatrix,
    method: SelectorMethod,
    ks: &[usize],
    seed: u64,
    config: &GridConfig,
) -> Result<Vec<SelectionResult>, SelectionError> {
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let mut base = SelectorConfig::new(method, k_max);
    base.seed = seed;
    if method != SelectorMethod::TopK {
        base.objective_folds = config.objective_folds;
    }
    if method == SelectorMethod::RecursiveElimination {
        base.rfe_step = config.rfe_step;
    }
    match method {
        SelectorMethod::TopK => {
            let scores = chi_square_scores(x)?;
            ks.iter()
                .map(|&k| select_top_k_with(&scores, SelectorConfig { k, ..base.clone() }))
                .collect()
        }
        SelectorMethod::ForwardSelection => {
            base.candidate_pool = Some(config.forward_pool.unwrap_or(10 * k_max).max(k_max));
            forward_select_path(x, &config.forward_wrapper, &base, ks)
        }
        SelectorMethod::RecursiveElimination => elimination_path(x, &base, &ClassifierSpec::logistic_regression(), ks),
    }
}

/// Run the grid on a fixed train/test split. Selection and vocabulary only
/// ever see `split.train`.
pub fn run_grid_with_split(
    corpus: &[LabeledWord],
    split: &HoldoutSplit,
    config: &GridConfig,
) -> Result<GridOutput, GridError> {
    for (axis, empty) in [
        ("selectors", config.selectors.is_empty()),
        ("classifiers", config.classifiers.is_empty()),
        ("profiles", config.profiles.is_empty()),
        ("k_values", config.k_values.is_empty()),
    ] {
        if empty {
            return Err(GridError::EmptyAxis(axis));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| GridError::Threads(e.to_string()))?;
    Ok(pool.install(|| grid_inner(corpus, split, config)))
}

fn grid_inner(corpus: &[LabeledWord], split: &HoldoutSplit, config: &GridConfig) -> GridOutput {
    let prepared: Vec<Result<Prepared, String>> = config
        .profiles
        .par_iter()
        .map(|p| prepare(corpus, split, p, config))
        .collect();

    let pairs: Vec<(usize, usize)> = (0..config.profiles.len())
        .flat_map(|p| (0..config.selectors.len()).map(move |s| (p, s)))
        .collect();
    let paths: Vec<Result<Vec<SelectionResult>, String>> = pairs
        .par_iter()
        .map(|&(p, s)| {
            let prep = prepared[p].as_ref().map_err(|e| e.clone())?;
            let method = config.selectors[s];
            let seed = selection_seed(config, &config.profiles[p], method);
            let started = Instant::now();
            let out = select_path(&prep.train, method, &prep.effective, seed, config).map_err(|e| e.to_string());
            log::info!(
                "profile {} selector {method}: {:.1}s",
                config.profiles[p].label(),
                started.elapsed().as_secs_f64()
            );
            out
        })
        .collect();

    let n_c = config.classifiers.len();
    let n_k = config.k_values.len();
    let cells: Vec<(usize, usize, usize, usize)> = pairs
        .iter()
        .enumerate()
        .flat_map(|(pi, &(p, s))| (0..n_c).flat_map(move |c| (0..n_k).map(move |k| (pi, p, s, c * n_k + k))))
        .collect();
    let mut records: Vec<(usize, usize, usize, usize, ExperimentRecord)> = cells
        .par_iter()
        .map(|&(pi, p, s, ck)| {
            let (c, ki) = (ck / n_k, ck % n_k);
            let record = run_cell(config, &prepared[p], &paths[pi], p, s, c, ki);
            (p, s, c, ki, record)
        })
        .collect();
    records.sort_by_key(|r| (r.0, r.1, r.2, r.3));

    let selections = pairs
        .iter()
        .zip(paths)
        .map(|(&(p, s), results)| GridSelection {
            profile: config.profiles[p].clone(),
            method: config.selectors[s],
            vocabulary: prepared[p].as_ref().ok().map(|prep| prep.vocabulary.clone()),
            results,
        })
        .collect();
    GridOutput {
        records: records.into_iter().map(|r| r.4).collect(),
        selections,
    }
}

fn run_cell(
    config: &GridConfig,
    prepared: &Result<Prepared, String>,
    path: &Result<Vec<SelectionResult>, String>,
    p: usize,
    s: usize,
    c: usize,
    ki: usize,
) -> ExperimentRecord {
    let profile = &config.profiles[p];
    let method = config.selectors[s];
    let k = config.k_values[ki];
    let mut classifier = config.classifiers[c].clone();
    let seed = derive_seed(
        config.seed,
        &[&profile.label(), method.short_name(), &classifier.describe(), &k.to_string()],
    );
    classifier.seed = seed;
    let mut record = ExperimentRecord {
        ngram_profile: profile.clone(),
        selector: SelectorConfig::new(method, k),
        classifier: classifier.clone(),
        k,
        accuracy: None,
        wall_time: None,
        seed,
        error: None,
    };
    let outcome = (|| -> Result<f64, String> {
        let prep = prepared.as_ref().map_err(|e| e.clone())?;
        let selection = &path.as_ref().map_err(|e| e.clone())?[ki];
        record.selector = selection.config.clone();
        let started = Instant::now();
        let train = prep.train.project_columns(&selection.selected).map_err(|e| e.to_string())?;
        let test = prep.test.project_columns(&selection.selected).map_err(|e| e.to_string())?;
        let model = classify::train(&train, &classifier).map_err(|e| e.to_string())?;
        let predicted = model.predict(&test).map_err(|e| e.to_string())?;
        let acc = accuracy(&predicted, test.labels()).map_err(|e| e.to_string())?;
        if config.record_timing {
            record.wall_time = Some(started.elapsed().as_secs_f64());
        }
        Ok(acc)
    })();
    match outcome {
        Ok(acc) => record.accuracy = Some(acc),
        Err(e) => {
            log::warn!("cell {} {} {} k={k}: {e}", profile.label(), method, classifier.describe());
            record.error = Some(e);
        }
    }
    record
}
