//! Brute-force oracles and random data shared by the integration tests.
#![allow(dead_code)]

use cmlid::classify::logreg::{loss_and_gradient, SoftmaxParams};
use cmlid::{FeatureMatrix, Tag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random count matrix; the first rows cycle through the classes so each
/// one is present.
pub fn random_dense(seed: u64, max_rows: usize, max_cols: usize) -> (Vec<Vec<u32>>, Vec<Tag>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(max_rows.min(6)..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let mut labels: Vec<Tag> = (0..rows).map(|i| Tag::ALL[i % 3]).collect();
    for i in 6..rows {
        labels[i] = Tag::ALL[rng.gen_range(0..3)];
    }
    let dense = labels
        .iter()
        .map(|t| {
            (0..cols)
                .map(|f| {
                    let lean = if f % 3 == t.index() { rng.gen_range(0..3) } else { 0 };
                    if rng.gen_bool(0.4) { rng.gen_range(0..4) + lean } else { 0 }
                })
                .collect()
        })
        .collect();
    (dense, labels)
}

pub fn matrix(dense: &[Vec<u32>], labels: &[Tag]) -> FeatureMatrix {
    FeatureMatrix::from_dense(dense, labels.to_vec())
}

/// Chi-square from an explicit class × {feature} contingency of count sums.
pub fn chi_square_oracle(dense: &[Vec<u32>], labels: &[Tag]) -> Vec<f64> {
    let n_cols = dense.first().map_or(0, |r| r.len());
    let n = labels.len() as f64;
    (0..n_cols)
        .map(|f| {
            let mut score = 0.0;
            let grand: f64 = dense.iter().map(|r| r[f] as f64).sum();
            for t in Tag::ALL {
                let rows_t = labels.iter().filter(|&&l| l == t).count() as f64;
                let observed: f64 = dense
                    .iter()
                    .zip(labels)
                    .filter(|(_, &l)| l == t)
                    .map(|(r, _)| r[f] as f64)
                    .sum();
                let expected = grand * rows_t / n;
                if expected > 0.0 {
                    score += (observed - expected).powi(2) / expected;
                }
            }
            score
        })
        .collect()
}

/// Multinomial NB posterior by multiplying one smoothed probability per
/// token occurrence and normalizing the joint over classes.
pub fn nb_posterior_oracle(dense: &[Vec<u32>], labels: &[Tag], alpha: f64, row: &[u32]) -> Vec<(Tag, f64)> {
    let n_cols = row.len();
    let mut joint = Vec::new();
    for t in Tag::ALL {
        let members: Vec<&Vec<u32>> = dense.iter().zip(labels).filter(|(_, &l)| l == t).map(|(r, _)| r).collect();
        if members.is_empty() {
            continue;
        }
        let prior = members.len() as f64 / labels.len() as f64;
        let total: f64 = members.iter().flat_map(|r| r.iter()).map(|&v| v as f64).sum();
        let mut p = prior;
        for f in 0..n_cols {
            let count: f64 = members.iter().map(|r| r[f] as f64).sum();
            let theta = (count + alpha) / (total + alpha * n_cols as f64);
            for _ in 0..row[f] {
                p *= theta;
            }
        }
        joint.push((t, p));
    }
    let z: f64 = joint.iter().map(|(_, p)| p).sum();
    joint.into_iter().map(|(t, p)| (t, p / z)).collect()
}

fn gini(counts: &[usize; 3]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

/// Every (feature, midpoint threshold) split of all rows with its weighted
/// Gini impurity, honouring `min_leaf` on both sides.
pub fn all_root_splits(dense: &[Vec<u32>], labels: &[Tag], min_leaf: usize) -> Vec<(usize, f64, f64)> {
    let n = labels.len();
    let n_cols = dense.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for f in 0..n_cols {
        let mut values: Vec<u32> = dense.iter().map(|r| r[f]).collect();
        values.sort_unstable();
        values.dedup();
        for w in values.windows(2) {
            let threshold = (w[0] as f64 + w[1] as f64) / 2.0;
            let mut left = [0usize; 3];
            let mut right = [0usize; 3];
            for (r, t) in dense.iter().zip(labels) {
                if (r[f] as f64) <= threshold {
                    left[t.index()] += 1;
                } else {
                    right[t.index()] += 1;
                }
            }
            let (nl, nr): (usize, usize) = (left.iter().sum(), right.iter().sum());
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let impurity = nl as f64 / n as f64 * gini(&left) + nr as f64 / n as f64 * gini(&right);
            out.push((f, threshold, impurity));
        }
    }
    out
}

/// Minimum-Gini root split; near-equal impurities go to the lower feature,
/// then the lower threshold.
pub fn best_root_split(dense: &[Vec<u32>], labels: &[Tag], min_leaf: usize) -> Option<(usize, f64)> {
    let splits = all_root_splits(dense, labels, min_leaf);
    let min = splits.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    splits
        .into_iter()
        .filter(|s| s.2 <= min + 1e-12)
        .map(|s| (s.0, s.1))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
}

/// Two informative features (label decided by which is larger) plus eight
/// uniform noise features.
pub fn planted_pair(seed: u64, rows: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dense = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    while dense.len() < rows {
        let a: u32 = rng.gen_range(0..5);
        let b: u32 = rng.gen_range(0..5);
        if a == b {
            continue;
        }
        let mut row = vec![a, b];
        row.extend((0..8).map(|_| rng.gen_range(0..4u32)));
        labels.push(if a > b { Tag::En } else { Tag::Hi });
        dense.push(row);
    }
    FeatureMatrix::from_dense(&dense, labels)
}

/// Largest relative gap between the analytic gradient and central
/// differences with step 1e-5, over every weight and bias.
pub fn max_fd_relative_error(x: &FeatureMatrix, targets: &[usize], params: &SoftmaxParams, l2: f64) -> f64 {
    let (_, grad) = loss_and_gradient(x, targets, params, l2);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let n_w = params.weights.len();
    for i in 0..n_w + params.bias.len() {
        let bump = |delta: f64| {
            let mut p = params.clone();
            if i < n_w {
                p.weights[i] += delta;
            } else {
                p.bias[i - n_w] += delta;
            }
            loss_and_gradient(x, targets, &p, l2).0
        };
        let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
        let analytic = if i < n_w { grad.weights[i] } else { grad.bias[i - n_w] };
        let rel = (fd - analytic).abs() / analytic.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}
