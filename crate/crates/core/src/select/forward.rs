//! Greedy sequential forward selection.
//!
//! Each step scores every remaining candidate `f` by the cross-validated
//! accuracy of `selected ∪ {f}` on one fold assignment shared by the whole
//! run, and keeps the best (lowest id on ties). With a candidate pool `M`,
//! only the top-M chi-square features are ever considered.
//!
//! For naive Bayes the objective is evaluated incrementally: per fold we
//! keep the class count totals of the current subset and, for every
//! held-out row, its running numerator sum and length. Scoring a candidate
//! then costs one pass over the held-out rows instead of a retrain, and the
//! arithmetic matches `classify::nb` operation for operation.

use rayon::prelude::*;

use super::chi2::{chi_square_scores, rank_by_score};
use super::objective::objective_with_plan;
use super::{SelectionError, SelectionResult, SelectorConfig, SelectorMethod, TraceStep};
use crate::classify::nb::{class_score, class_slots, log_denom, log_numer, log_prior};
use crate::classify::{argmax, present_classes, ClassifierKind, ClassifierSpec};
use crate::corpus::Tag;
use crate::eval::split::{mean_fold_accuracy, stratified_kfold, FoldPlan};
use crate::ngram::FeatureMatrix;

pub fn forward_select(
    x: &FeatureMatrix,
    spec: &ClassifierSpec,
    config: &SelectorConfig,
) -> Result<SelectionResult, SelectionError> {
    let mut path = forward_select_path(x, spec, config, &[config.k])?;
    Ok(path.pop().expect("one target"))
}

/// Run the greedy search once up to `config.k` and return the result for
/// every requested size in `ks` (each is a prefix of the full run).
pub fn forward_select_path(
    x: &FeatureMatrix,
    spec: &ClassifierSpec,
    config: &SelectorConfig,
    ks: &[usize],
) -> Result<Vec<SelectionResult>, SelectionError> {
    if config.method != SelectorMethod::ForwardSelection {
        return Err(SelectionError::BadConfig("expected a forward selection config".into()));
    }
    config.validate(x.n_cols())?;
    let pool = candidate_pool(x, config.candidate_pool)?;
    if config.k > pool.len() {
        return Err(SelectionError::KTooLarge {
            k: config.k,
            available: pool.len(),
        });
    }
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > config.k) {
        return Err(SelectionError::BadConfig(format!("path size {bad} outside 1..={}", config.k)));
    }
    let plan = stratified_kfold(x.labels(), config.objective_folds, true, config.seed)?;

    let mut evaluator: Box<dyn CandidateEvaluator> = match spec.kind {
        ClassifierKind::NaiveBayes => Box::new(IncrementalNb::new(x, &plan, spec.nb_alpha)),
        _ => Box::new(Retrain {
            x,
            spec: spec.clone(),
            plan: plan.clone(),
            selected: Vec::new(),
        }),
    };

    let mut in_set = vec![false; x.n_cols()];
    let mut selected = Vec::with_capacity(config.k);
    let mut scores = Vec::with_capacity(config.k);
    let mut trace = Vec::with_capacity(config.k);
    for _ in 0..config.k {
        let candidates: Vec<usize> = pool.iter().copied().filter(|&f| !in_set[f]).collect();
        let objectives = evaluator.evaluate(&candidates)?;
        // candidates ascend by id, so a strict comparison keeps the lowest id
        let mut best = 0;
        for i in 1..candidates.len() {
            if objectives[i] > objectives[best] {
                best = i;
            }
        }
        let (winner, objective) = (candidates[best], objectives[best]);
        evaluator.commit(winner);
        in_set[winner] = true;
        selected.push(winner);
        scores.push(objective);
        trace.push(TraceStep::Added {
            feature: winner,
            objective,
        });
    }

    Ok(ks
        .iter()
        .map(|&k| SelectionResult {
            config: SelectorConfig { k, ..config.clone() },
            selected: selected[..k].to_vec(),
            scores: scores[..k].to_vec(),
            trace: trace[..k].to_vec(),
        })
        .collect())
}

/// Candidate ids in ascending order: all features, or the top-M by
/// chi-square when a pool size below the column count is given.
fn candidate_pool(x: &FeatureMatrix, pool: Option<usize>) -> Result<Vec<usize>, SelectionError> {
    match pool {
        Some(m) if m < x.n_cols() => {
            let scores = chi_square_scores(x)?;
            let mut ids: Vec<usize> = rank_by_score(&scores).into_iter().take(m).collect();
            ids.sort_unstable();
            Ok(ids)
        }
        _ => Ok((0..x.n_cols()).collect()),
    }
}

trait CandidateEvaluator {
    /// Objective of `selected ∪ {f}` for each candidate, in input order.
    fn evaluate(&self, candidates: &[usize]) -> Result<Vec<f64>, SelectionError>;
    fn commit(&mut self, feature: usize);
}

/// Generic path: retrain the classifier on every fold for every candidate.
struct Retrain<'a> {
    x: &'a FeatureMatrix,
    spec: ClassifierSpec,
    plan: FoldPlan,
    selected: Vec<usize>,
}

impl CandidateEvaluator for Retrain<'_> {
    fn evaluate(&self, candidates: &[usize]) -> Result<Vec<f64>, SelectionError> {
        candidates
            .par_iter()
            .map(|&f| {
                let mut subset = self.selected.clone();
                subset.push(f);
                objective_with_plan(self.x, &subset, &self.spec, &self.plan)
            })
            .collect()
    }

    fn commit(&mut self, feature: usize) {
        self.selected.push(feature);
    }
}

struct NbFold {
    classes: Vec<Tag>,
    log_prior: Vec<f64>,
    /// Training-row count of each feature per class slot.
    counts: Vec<[u64; 3]>,
    /// Class totals over the current subset.
    totals: [u64; 3],
    /// Held-out rows of this fold.
    test_rows: Vec<usize>,
    /// Running `Σ x_f · ln(n_cf + α)` per held-out row and class slot.
    numer_sums: Vec<[f64; 3]>,
    lengths: Vec<u64>,
}

struct IncrementalNb<'a> {
    x: &'a FeatureMatrix,
    alpha: f64,
    columns: Vec<Vec<(usize, u32)>>,
    folds: Vec<NbFold>,
    /// Position of each row inside its fold's held-out list.
    test_pos: Vec<usize>,
    fold_of: Vec<usize>,
    n_selected: usize,
}

impl<'a> IncrementalNb<'a> {
    fn new(x: &'a FeatureMatrix, plan: &FoldPlan, alpha: f64) -> Self {
        let n_rows = x.n_rows();
        let mut test_pos = vec![0; n_rows];
        let fold_of: Vec<usize> = (0..n_rows).map(|r| plan.fold_of(r)).collect();
        let folds = (0..plan.folds())
            .map(|fold| {
                let train = plan.train_rows(fold);
                let test = plan.test_rows(fold);
                for (i, &r) in test.iter().enumerate() {
                    test_pos[r] = i;
                }
                let train_labels: Vec<Tag> = train.iter().map(|&r| x.labels()[r]).collect();
                let classes = present_classes(&train_labels);
                let slot = class_slots(&classes);
                let mut class_rows = vec![0usize; classes.len()];
                let mut counts = vec![[0u64; 3]; x.n_cols()];
                for &r in &train {
                    let c = slot[x.labels()[r].index()];
                    class_rows[c] += 1;
                    for (f, v) in x.row(r) {
                        counts[f][c] += v as u64;
                    }
                }
                NbFold {
                    log_prior: class_rows.iter().map(|&n| log_prior(n, train.len())).collect(),
                    classes,
                    counts,
                    totals: [0; 3],
                    numer_sums: vec![[0.0; 3]; test.len()],
                    lengths: vec![0; test.len()],
                    test_rows: test,
                }
            })
            .collect();
        IncrementalNb {
            x,
            alpha,
            columns: x.columns(),
            folds,
            test_pos,
            fold_of,
            n_selected: 0,
        }
    }

    fn objective(&self, f: usize) -> f64 {
        let n_features = self.n_selected + 1;
        let mut value = vec![0u32; self.x.n_rows()];
        for &(r, v) in &self.columns[f] {
            value[r] = v;
        }
        let per_fold: Vec<(usize, usize)> = self
            .folds
            .iter()
            .map(|fold| {
                let k = fold.classes.len();
                let mut numer_f = [0.0; 3];
                let mut denom = [0.0; 3];
                for c in 0..k {
                    numer_f[c] = log_numer(fold.counts[f][c], self.alpha);
                    denom[c] = log_denom(fold.totals[c] + fold.counts[f][c], self.alpha, n_features);
                }
                let mut scores = [0.0; 3];
                let mut hits = 0;
                for (i, &r) in fold.test_rows.iter().enumerate() {
                    let v = value[r];
                    let len = fold.lengths[i] + v as u64;
                    for c in 0..k {
                        let mut acc = fold.numer_sums[i][c];
                        if v > 0 {
                            acc += v as f64 * numer_f[c];
                        }
                        scores[c] = class_score(fold.log_prior[c], acc, len, denom[c]);
                    }
                    if fold.classes[argmax(&scores[..k])] == self.x.labels()[r] {
                        hits += 1;
                    }
                }
                (hits, fold.test_rows.len())
            })
            .collect();
        mean_fold_accuracy(&per_fold)
    }
}

impl CandidateEvaluator for IncrementalNb<'_> {
    fn evaluate(&self, candidates: &[usize]) -> Result<Vec<f64>, SelectionError> {
        Ok(candidates.par_iter().map(|&f| self.objective(f)).collect())
    }

    fn commit(&mut self, feature: usize) {
        for fold in &mut self.folds {
            for c in 0..fold.classes.len() {
                fold.totals[c] += fold.counts[feature][c];
            }
        }
        for &(r, v) in &self.columns[feature] {
            let fold = &mut self.folds[self.fold_of[r]];
            let i = self.test_pos[r];
            for c in 0..fold.classes.len() {
                fold.numer_sums[i][c] += v as f64 * log_numer(fold.counts[feature][c], self.alpha);
            }
            fold.lengths[i] += v as u64;
        }
        self.n_selected += 1;
    }
}
