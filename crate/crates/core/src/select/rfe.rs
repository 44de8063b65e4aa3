//! Recursive feature elimination ranked by multinomial logistic regression
//! weights, plus the cross-validated choice of the subset size.

use rayon::prelude::*;

use super::objective::wrapper_objective;
use super::{SelectionError, SelectionResult, SelectorConfig, SelectorMethod, TraceStep};
use crate::classify::logreg::train_logreg;
use crate::classify::{ClassifierError, ClassifierSpec};
use crate::ngram::FeatureMatrix;

/// Eliminate down to `config.k` features using the default logistic
/// regression as the ranking model.
pub fn recursive_eliminate(x: &FeatureMatrix, config: &SelectorConfig) -> Result<SelectionResult, SelectionError> {
    let mut path = elimination_path(x, config, &ClassifierSpec::logistic_regression(), &[config.k])?;
    Ok(path.pop().expect("one target"))
}

/// One elimination run that stops at every size in `targets` on the way
/// down. A round removes `min(rfe_step, survivors − next target)` features,
/// so each target is hit exactly. Results come back in `targets` order.
pub fn elimination_path(
    x: &FeatureMatrix,
    config: &SelectorConfig,
    ranking: &ClassifierSpec,
    targets: &[usize],
) -> Result<Vec<SelectionResult>, SelectionError> {
    if config.method != SelectorMethod::RecursiveElimination {
        return Err(SelectionError::BadConfig("expected a recursive elimination config".into()));
    }
    for &k in targets {
        SelectorConfig { k, ..config.clone() }.validate(x.n_cols())?;
    }
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[b].cmp(&targets[a]));

    let mut survivors: Vec<usize> = (0..x.n_cols()).collect();
    let mut trace = Vec::new();
    let mut results: Vec<Option<SelectionResult>> = vec![None; targets.len()];
    for &t in &order {
        let target = targets[t];
        while survivors.len() > target {
            let remove = config.rfe_step.min(survivors.len() - target);
            let importances = rank_importances(x, &survivors, ranking)?;
            // weakest first; among equals the higher id goes first
            let mut by_weakness: Vec<(usize, f64)> = survivors.iter().copied().zip(importances).collect();
            by_weakness.sort_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let dropped: Vec<(usize, f64)> = by_weakness[..remove].to_vec();
            survivors.retain(|f| !dropped.iter().any(|d| d.0 == *f));
            trace.push(TraceStep::Removed {
                features: dropped,
                remaining: survivors.len(),
            });
        }
        results[t] = Some(SelectionResult {
            config: SelectorConfig { k: target, ..config.clone() },
            selected: survivors.clone(),
            scores: vec![1.0; survivors.len()],
            trace: trace.clone(),
        });
    }
    Ok(results.into_iter().map(|r| r.expect("every target visited")).collect())
}

/// Per-survivor L2 norm of the class weights of a model fitted on the
/// surviving columns.
pub fn rank_importances(
    x: &FeatureMatrix,
    survivors: &[usize],
    ranking: &ClassifierSpec,
) -> Result<Vec<f64>, SelectionError> {
    let projected = x.project_columns(survivors)?;
    let model = train_logreg(&projected, ranking).map_err(|e| match e {
        e @ ClassifierError::Divergence { .. } => SelectionError::RankingModelDivergence(e),
        other => SelectionError::Classifier(other),
    })?;
    Ok((0..survivors.len()).map(|j| model.feature_importance(j)).collect())
}

/// Run elimination for every candidate size, score each surviving subset
/// with the cross-validated ranking model and keep the best size (the
/// smaller one on ties).
pub fn recursive_eliminate_cv(
    x: &FeatureMatrix,
    config: &SelectorConfig,
    k_candidates: &[usize],
) -> Result<(usize, SelectionResult), SelectionError> {
    recursive_eliminate_cv_with(x, config, &ClassifierSpec::logistic_regression(), k_candidates)
}

pub fn recursive_eliminate_cv_with(
    x: &FeatureMatrix,
    config: &SelectorConfig,
    ranking: &ClassifierSpec,
    k_candidates: &[usize],
) -> Result<(usize, SelectionResult), SelectionError> {
    let mut ks = k_candidates.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(SelectionError::BadConfig("no candidate sizes given".into()));
    }
    let mut scored: Vec<(SelectionResult, f64)> = ks
        .par_iter()
        .map(|&k| {
            let cfg = SelectorConfig { k, ..config.clone() };
            let result = elimination_path(x, &cfg, ranking, &[k])?.pop().expect("one target");
            let score = wrapper_objective(x, &result.selected, ranking, config.objective_folds, config.seed)?;
            Ok((result, score))
        })
        .collect::<Result<_, SelectionError>>()?;
    let mut best = 0;
    for i in 1..scored.len() {
        if scored[i].1 > scored[best].1 {
            best = i;
        }
    }
    let (result, _) = scored.swap_remove(best);
    Ok((result.k(), result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tag;

    fn hand_dataset() -> FeatureMatrix {
        FeatureMatrix::from_dense(
            &[
                vec![3, 0, 1, 0],
                vec![2, 1, 1, 1],
                vec![3, 1, 0, 0],
                vec![0, 2, 1, 1],
                vec![1, 3, 0, 0],
                vec![0, 3, 1, 1],
                vec![1, 1, 3, 0],
                vec![0, 0, 2, 1],
                vec![1, 0, 3, 0],
            ],
            [Tag::En; 3].into_iter().chain([Tag::Hi; 3]).chain([Tag::Ne; 3]).collect(),
        )
    }

    #[test]
    fn full_k_is_identity() {
        let x = hand_dataset();
        let r = recursive_eliminate(&x, &SelectorConfig::new(SelectorMethod::RecursiveElimination, 4)).unwrap();
        assert_eq!(r.selected, vec![0, 1, 2, 3]);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn each_removal_is_the_refit_minimum() {
        let x = hand_dataset();
        let spec = ClassifierSpec::logistic_regression();
        let r = recursive_eliminate(&x, &SelectorConfig::new(SelectorMethod::RecursiveElimination, 1)).unwrap();
        let mut survivors: Vec<usize> = (0..4).collect();
        for step in &r.trace {
            let TraceStep::Removed { features, .. } = step else { panic!("unexpected step") };
            assert_eq!(features.len(), 1);
            // independent refit on the survivors
            let model = train_logreg(&x.project_columns(&survivors).unwrap(), &spec).unwrap();
            let imp: Vec<f64> = (0..survivors.len()).map(|j| model.feature_importance(j)).collect();
            let min = imp.iter().copied().fold(f64::INFINITY, f64::min);
            let pos = survivors.iter().position(|&f| f == features[0].0).unwrap();
            assert_eq!(imp[pos], min);
            survivors.remove(pos);
        }
        assert_eq!(survivors, r.selected);
    }

    #[test]
    fn path_hits_targets_and_nests() {
        let x = hand_dataset();
        let mut cfg = SelectorConfig::new(SelectorMethod::RecursiveElimination, 1);
        cfg.rfe_step = 2;
        let path = elimination_path(&x, &cfg, &ClassifierSpec::logistic_regression(), &[3, 1]).unwrap();
        assert_eq!(path[0].selected.len(), 3);
        assert_eq!(path[1].selected.len(), 1);
        assert!(path[1].selected.iter().all(|f| path[0].selected.contains(f)));
        assert_eq!(path[1].elimination_ranking(4).iter().filter(|&&r| r == 1).count(), 1);
    }

    #[test]
    fn cv_single_candidate() {
        let x = hand_dataset();
        let cfg = SelectorConfig::new(SelectorMethod::RecursiveElimination, 4);
        let (k, r) = recursive_eliminate_cv(&x, &cfg, &[4]).unwrap();
        assert_eq!(k, 4);
        assert_eq!(r.selected, vec![0, 1, 2, 3]);
    }

    #[test]
    fn too_large_k() {
        let x = hand_dataset();
        assert_eq!(
            recursive_eliminate(&x, &SelectorConfig::new(SelectorMethod::RecursiveElimination, 5)),
            Err(SelectionError::KTooLarge { k: 5, available: 4 })
        );
    }
}
