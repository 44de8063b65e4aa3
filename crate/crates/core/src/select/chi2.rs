//! Count-based chi-square feature scores and the top-k filter.

use super::{SelectionError, SelectionResult, SelectorConfig, SelectorMethod};
use crate::corpus::Tag;
use crate::ngram::FeatureMatrix;

/// Chi-square statistic of each feature against the labels.
///
/// For a feature, `O_c` is its total count over rows of class `c`, `F` the
/// total over all rows, `E_c = F · rows_c / n_rows`, and the score is
/// `Σ_c (O_c − E_c)² / E_c` with zero-expectation terms dropped.
pub fn chi_square_scores(x: &FeatureMatrix) -> Result<Vec<f64>, SelectionError> {
    let n_rows = x.n_rows();
    let mut class_rows = [0usize; 3];
    for t in x.labels() {
        class_rows[t.index()] += 1;
    }
    if class_rows.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(SelectionError::SingleClass);
    }
    let weights: Vec<f64> = class_rows.iter().map(|&c| c as f64 / n_rows as f64).collect();

    let mut observed = vec![[0u64; 3]; x.n_cols()];
    for r in 0..n_rows {
        let c = x.labels()[r].index();
        for (f, v) in x.row(r) {
            observed[f][c] += v as u64;
        }
    }
    Ok(observed
        .iter()
        .map(|o| {
            let total: u64 = o.iter().sum();
            Tag::ALL
                .iter()
                .map(|t| {
                    let c = t.index();
                    let expected = total as f64 * weights[c];
                    if expected > 0.0 {
                        let d = o[c] as f64 - expected;
                        d * d / expected
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// Feature ids ordered by (score descending, id ascending).
pub fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids
}

pub fn select_top_k(scores: &[f64], k: usize) -> Result<SelectionResult, SelectionError> {
    let mut config = SelectorConfig::new(SelectorMethod::TopK, k);
    config.seed = 0;
    select_top_k_with(scores, config)
}

pub fn select_top_k_with(scores: &[f64], config: SelectorConfig) -> Result<SelectionResult, SelectionError> {
    config.validate(scores.len())?;
    let selected: Vec<usize> = rank_by_score(scores).into_iter().take(config.k).collect();
    let picked = selected.iter().map(|&f| scores[f]).collect();
    Ok(SelectionResult {
        config,
        selected,
        scores: picked,
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_contingency() {
        let x = FeatureMatrix::from_dense(
            &[vec![2, 1], vec![2, 1], vec![0, 1], vec![0, 1]],
            vec![Tag::En, Tag::En, Tag::Hi, Tag::Hi],
        );
        let s = chi_square_scores(&x).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-12);
        assert_eq!(s[1], 0.0);
    }

    #[test]
    fn single_class_rejected() {
        let x = FeatureMatrix::from_dense(&[vec![1], vec![2]], vec![Tag::Hi, Tag::Hi]);
        assert_eq!(chi_square_scores(&x), Err(SelectionError::SingleClass));
    }

    #[test]
    fn top_k_ties_prefer_lower_id() {
        let r = select_top_k(&[0.5, 3.0, 3.0], 2).unwrap();
        assert_eq!(r.selected, vec![1, 2]);
        let all = select_top_k(&[0.5, 3.0, 3.0], 3).unwrap();
        assert_eq!(all.selected, vec![1, 2, 0]);
        assert_eq!(
            select_top_k(&[0.5], 2),
            Err(SelectionError::KTooLarge { k: 2, available: 1 })
        );
    }

    proptest! {
        #[test]
        fn top_k_nested_and_sorted(scores in proptest::collection::vec(prop_oneof![0.0f64..10.0, Just(1.0)], 1..30), k in 1usize..30) {
            prop_assume!(k < scores.len());
            let a = select_top_k(&scores, k).unwrap();
            let b = select_top_k(&scores, k + 1).unwrap();
            prop_assert_eq!(&a.selected[..], &b.selected[..k]);
            prop_assert!(a.scores.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
