//! Seeded stratified holdout and k-fold partitions. Splits are index lists
//! into the instance array; no data is copied.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::Tag;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("class {tag} has {count} instance(s), need at least {needed}")]
    ClassTooSmall { tag: Tag, count: usize, needed: usize },
    #[error("{rows} rows cannot fill {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("invalid split plan: {0}")]
    BadPlan(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitKind {
    Holdout { train_fraction: f64 },
    KFold { folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            kind: SplitKind::Holdout { train_fraction: 0.8 },
            stratified: true,
            seed: 42,
        }
    }
}

impl SplitPlan {
    pub fn describe(&self) -> String {
        let kind = match self.kind {
            SplitKind::Holdout { train_fraction } => format!("holdout(train_fraction={train_fraction})"),
            SplitKind::KFold { folds } => format!("kfold(folds={folds})"),
        };
        format!("{kind} stratified={} seed={}", self.stratified, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldoutSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Row indices grouped by class (canonical order), each group shuffled by
/// one RNG stream. Unstratified plans use a single group.
fn shuffled_groups(labels: &[Tag], stratified: bool, seed: u64) -> Vec<(Option<Tag>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<(Option<Tag>, Vec<usize>)> = if stratified {
        Tag::ALL
            .into_iter()
            .map(|t| (Some(t), (0..labels.len()).filter(|&i| labels[i] == t).collect()))
            .collect()
    } else {
        vec![(None, (0..labels.len()).collect())]
    };
    for (_, g) in &mut groups {
        g.shuffle(&mut rng);
    }
    groups
}

/// Proportional per-class split: `round(n_c · fraction)` rows of each class
/// go to training, clamped so both sides keep at least one row.
pub fn stratified_holdout(labels: &[Tag], train_fraction: f64, stratified: bool, seed: u64) -> Result<HoldoutSplit, SplitError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SplitError::BadPlan(format!("train_fraction {train_fraction} not in (0,1)")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (tag, group) in shuffled_groups(labels, stratified, seed) {
        if group.is_empty() {
            continue;
        }
        if group.len() < 2 {
            return Err(SplitError::ClassTooSmall {
                tag: tag.unwrap_or(labels[group[0]]),
                count: group.len(),
                needed: 2,
            });
        }
        let n_train = ((group.len() as f64 * train_fraction).round() as usize).clamp(1, group.len() - 1);
        train.extend_from_slice(&group[..n_train]);
        test.extend_from_slice(&group[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(HoldoutSplit { train, test })
}

pub fn holdout(labels: &[Tag], plan: &SplitPlan) -> Result<HoldoutSplit, SplitError> {
    match plan.kind {
        SplitKind::Holdout { train_fraction } => stratified_holdout(labels, train_fraction, plan.stratified, plan.seed),
        SplitKind::KFold { .. } => Err(SplitError::BadPlan("expected a holdout plan".into())),
    }
}

/// Fold membership of every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    folds: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.assignment[row]
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] != fold).collect()
    }
}

/// Deal each shuffled class round-robin over the folds, carrying the
/// position across classes so fold sizes differ by at most one overall and
/// per-class counts differ by at most one between folds.
pub fn stratified_kfold(labels: &[Tag], folds: usize, stratified: bool, seed: u64) -> Result<FoldPlan, SplitError> {
    if folds < 2 {
        return Err(SplitError::BadPlan(format!("need at least 2 folds, got {folds}")));
    }
    if labels.len() < folds {
        return Err(SplitError::TooFewRows {
            rows: labels.len(),
            folds,
        });
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for (_, group) in shuffled_groups(labels, stratified, seed) {
        for r in group {
            assignment[r] = next % folds;
            next += 1;
        }
    }
    Ok(FoldPlan { folds, assignment })
}

/// Mean of per-fold accuracies given `(correct, total)` per fold.
pub fn mean_fold_accuracy(per_fold: &[(usize, usize)]) -> f64 {
    let sum: f64 = per_fold
        .iter()
        .map(|&(hit, n)| if n == 0 { 0.0 } else { hit as f64 / n as f64 })
        .sum();
    sum / per_fold.len() as f64
}
