//! Cross-validated accuracy of a classifier restricted to a feature subset.

use super::SelectionError;
use crate::classify::{self, ClassifierSpec};
use crate::eval::split::{mean_fold_accuracy, stratified_kfold, FoldPlan};
use crate::ngram::FeatureMatrix;

/// Mean accuracy over `folds` stratified folds (seeded by `seed`) of
/// `spec` trained on the `subset` columns.
pub fn wrapper_objective(
    x: &FeatureMatrix,
    subset: &[usize],
    spec: &ClassifierSpec,
    folds: usize,
    seed: u64,
) -> Result<f64, SelectionError> {
    let plan = stratified_kfold(x.labels(), folds, true, seed)?;
    objective_with_plan(x, subset, spec, &plan)
}

/// Same as [`wrapper_objective`] with a fixed fold assignment, so several
/// subsets can be compared on identical folds.
pub fn objective_with_plan(
    x: &FeatureMatrix,
    subset: &[usize],
    spec: &ClassifierSpec,
    plan: &FoldPlan,
) -> Result<f64, SelectionError> {
    if subset.is_empty() {
        return Err(SelectionError::BadConfig("wrapper objective needs a non-empty subset".into()));
    }
    let projected = x.project_columns(subset)?;
    let mut per_fold = Vec::with_capacity(plan.folds());
    for fold in 0..plan.folds() {
        let train = projected.take_rows(&plan.train_rows(fold))?;
        let test = projected.take_rows(&plan.test_rows(fold))?;
        let model = classify::train(&train, spec)?;
        let pred = model.predict(&test)?;
        let hits = pred.iter().zip(test.labels()).filter(|(p, g)| p == g).count();
        per_fold.push((hits, test.n_rows()));
    }
    Ok(mean_fold_accuracy(&per_fold))
}
