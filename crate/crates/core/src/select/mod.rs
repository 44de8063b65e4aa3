//! Feature selectors: chi-square top-k filter, greedy forward wrapper and
//! recursive feature elimination.
//!
//! All selectors are deterministic for a given input and seed. Ties are
//! broken by feature id: the lower id wins when selecting, the higher id
//! goes first when eliminating.

pub mod chi2;
pub mod forward;
pub mod objective;
pub mod rfe;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::classify::ClassifierError;
use crate::eval::split::SplitError;
use crate::ngram::{FeatureError, Vocabulary};

pub use chi2::{chi_square_scores, select_top_k};
pub use forward::{forward_select, forward_select_path};
pub use objective::wrapper_objective;
pub use rfe::{elimination_path, recursive_eliminate, recursive_eliminate_cv};

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("chi-square needs at least two classes")]
    SingleClass,
    #[error("k = {k} exceeds the {available} available features")]
    KTooLarge { k: usize, available: usize },
    #[error("invalid selector configuration: {0}")]
    BadConfig(String),
    #[error("ranking model failed: {0}")]
    RankingModelDivergence(ClassifierError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Split(#[from] SplitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SelectorMethod {
    TopK,
    ForwardSelection,
    RecursiveElimination,
}

impl SelectorMethod {
    pub const ALL: [SelectorMethod; 3] = [
        SelectorMethod::TopK,
        SelectorMethod::ForwardSelection,
        SelectorMethod::RecursiveElimination,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            SelectorMethod::TopK => "topk",
            SelectorMethod::ForwardSelection => "forward",
            SelectorMethod::RecursiveElimination => "rfe",
        }
    }
}

impl fmt::Display for SelectorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SelectorMethod {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "topk" | "top-k" | "chi2" => Ok(SelectorMethod::TopK),
            "forward" | "sfs" => Ok(SelectorMethod::ForwardSelection),
            "rfe" | "backward" => Ok(SelectorMethod::RecursiveElimination),
            other => Err(SelectionError::BadConfig(format!("unknown selector `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorConfig {
    pub method: SelectorMethod,
    pub k: usize,
    /// Forward selection only: pre-trim candidates to the top-M chi-square
    /// features. `None` means every feature is a candidate.
    pub candidate_pool: Option<usize>,
    pub rfe_step: usize,
    pub objective_folds: usize,
    pub seed: u64,
}

impl SelectorConfig {
    /// Defaults: pool `10·k` for forward selection, step 1, 3 folds, seed 42.
    pub fn new(method: SelectorMethod, k: usize) -> Self {
        SelectorConfig {
            method,
            k,
            candidate_pool: match method {
                SelectorMethod::ForwardSelection => Some(10 * k),
                _ => None,
            },
            rfe_step: 1,
            objective_folds: 3,
            seed: 42,
        }
    }

    pub fn validate(&self, n_cols: usize) -> Result<(), SelectionError> {
        if self.k == 0 {
            return Err(SelectionError::BadConfig("k must be at least 1".into()));
        }
        if self.k > n_cols {
            return Err(SelectionError::KTooLarge {
                k: self.k,
                available: n_cols,
            });
        }
        if self.rfe_step == 0 {
            return Err(SelectionError::BadConfig("rfe_step must be at least 1".into()));
        }
        if self.objective_folds < 2 {
            return Err(SelectionError::BadConfig("objective_folds must be at least 2".into()));
        }
        if let Some(m) = self.candidate_pool {
            if m < self.k {
                return Err(SelectionError::BadConfig(format!(
                    "candidate_pool {m} is smaller than k = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// e.g. `forward[k=50;pool=500;folds=3;seed=42]`; only fields used by
    /// the method.
    pub fn describe(&self) -> String {
        match self.method {
            SelectorMethod::TopK => format!("topk[k={};seed={}]", self.k, self.seed),
            SelectorMethod::ForwardSelection => format!(
                "forward[k={};pool={};folds={};seed={}]",
                self.k,
                self.candidate_pool.map_or("all".to_string(), |m| m.to_string()),
                self.objective_folds,
                self.seed
            ),
            SelectorMethod::RecursiveElimination => format!(
                "rfe[k={};step={};folds={};seed={}]",
                self.k, self.rfe_step, self.objective_folds, self.seed
            ),
        }
    }

    /// `seed` applies unless the description carries its own.
    pub fn parse_description(s: &str, seed: u64) -> Result<Self, SelectionError> {
        let bad = || SelectionError::BadConfig(format!("cannot parse selector `{s}`"));
        let (method, params) = match s.split_once('[') {
            Some((m, rest)) => (m, rest.strip_suffix(']').ok_or_else(bad)?),
            None => (s, ""),
        };
        let mut cfg = SelectorConfig::new(method.parse()?, 1);
        cfg.seed = seed;
        let mut pool_seen = false;
        for kv in params.split(';').filter(|p| !p.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(bad)?;
            let int = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "k" => cfg.k = int()?,
                "pool" => {
                    pool_seen = true;
                    cfg.candidate_pool = if value == "all" { None } else { Some(int()?) };
                }
                "step" => cfg.rfe_step = int()?,
                "folds" => cfg.objective_folds = int()?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        if cfg.method == SelectorMethod::ForwardSelection && !pool_seen {
            cfg.candidate_pool = Some(10 * cfg.k);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceStep {
    /// Forward step: `feature` joined the set with this objective value.
    Added { feature: usize, objective: f64 },
    /// Elimination round: features dropped with their importances, and the
    /// number of survivors afterwards.
    Removed {
        features: Vec<(usize, f64)>,
        remaining: usize,
    },
}

/// Output of one selector run. `scores[i]` belongs to `selected[i]`: the
/// chi-square score for top-k, the objective at the step the feature was
/// added for forward selection, and the elimination rank (1 = survived)
/// for recursive elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub config: SelectorConfig,
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
    pub trace: Vec<TraceStep>,
}

impl SelectionResult {
    pub fn k(&self) -> usize {
        self.selected.len()
    }

    /// Per-feature elimination rank: survivors 1, last eliminated round 2,
    /// and so on. Only meaningful for recursive elimination results.
    pub fn elimination_ranking(&self, n_cols: usize) -> Vec<usize> {
        let mut rank = vec![1; n_cols];
        let rounds: Vec<&Vec<(usize, f64)>> = self
            .trace
            .iter()
            .filter_map(|s| match s {
                TraceStep::Removed { features, .. } => Some(features),
                _ => None,
            })
            .collect();
        let n = rounds.len();
        for (i, round) in rounds.into_iter().enumerate() {
            for &(f, _) in round {
                rank[f] = n - i + 1;
            }
        }
        rank
    }

    /// Text form: a `#` header with method, k and seed, then one
    /// `feature_id<TAB>gram<TAB>score` line per selected feature.
    pub fn to_text(&self, vocab: Option<&Vocabulary>) -> String {
        let mut out = format!(
            "# selection method={} k={} seed={} config={}\n",
            self.config.method,
            self.k(),
            self.config.seed,
            self.config.describe()
        );
        for (&f, &s) in self.selected.iter().zip(&self.scores) {
            let gram = vocab.and_then(|v| v.gram(f)).unwrap_or("");
            out.push_str(&format!("{f}\t{gram}\t{s}\n"));
        }
        out
    }
}

/// Parse the body of [`SelectionResult::to_text`] into `(id, gram, score)`.
pub fn parse_selection_text(text: &str) -> Result<Vec<(usize, String, f64)>, SelectionError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let bad = || SelectionError::BadConfig(format!("selection line {}: malformed", i + 1));
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, gram, score] = fields.as_slice() else {
            return Err(bad());
        };
        out.push((
            id.parse().map_err(|_| bad())?,
            gram.to_string(),
            score.parse().map_err(|_| bad())?,
        ));
    }
    Ok(out)
}
