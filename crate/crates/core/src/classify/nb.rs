//! Multinomial naive Bayes over count features.
//!
//! `P(f|c) = (n_cf + α) / (T_c + α·F)`. The model keeps the numerator logs
//! per feature and one denominator log per class, and scores a row as
//! `log P(c) + Σ x_f·ln(n_cf + α) − (Σ x_f)·ln(T_c + α·F)`. The greedy
//! wrapper in `select::forward` evaluates candidates with the same helper
//! functions, so both paths produce bit-identical scores.

use super::{argmax, classes_line, fmt_row, present_classes, ClassifierError, ClassifierSpec, ModelLines};
use crate::corpus::Tag;
use crate::ngram::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    classes: Vec<Tag>,
    n_features: usize,
    log_prior: Vec<f64>,
    log_numer: Vec<Vec<f64>>,
    log_denom: Vec<f64>,
}

#[inline]
pub(crate) fn log_prior(class_rows: usize, n_rows: usize) -> f64 {
    (class_rows as f64 / n_rows as f64).ln()
}

#[inline]
pub(crate) fn log_numer(count: u64, alpha: f64) -> f64 {
    (count as f64 + alpha).ln()
}

#[inline]
pub(crate) fn log_denom(total: u64, alpha: f64, n_features: usize) -> f64 {
    (total as f64 + alpha * n_features as f64).ln()
}

/// Final class score from the accumulated numerator sum and the row length.
#[inline]
pub(crate) fn class_score(log_prior: f64, numer_sum: f64, row_len: u64, log_denom: f64) -> f64 {
    if row_len == 0 {
        log_prior
    } else {
        log_prior + (numer_sum - row_len as f64 * log_denom)
    }
}

pub fn train_nb(x: &FeatureMatrix, spec: &ClassifierSpec) -> Result<NaiveBayes, ClassifierError> {
    let n_rows = x.n_rows();
    if n_rows == 0 {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let classes = present_classes(x.labels());
    let slot = class_slots(&classes);
    let n_features = x.n_cols();
    let mut rows_per_class = vec![0usize; classes.len()];
    let mut counts = vec![vec![0u64; n_features]; classes.len()];
    for r in 0..n_rows {
        let c = slot[x.labels()[r].index()];
        rows_per_class[c] += 1;
        for (f, v) in x.row(r) {
            counts[c][f] += v as u64;
        }
    }
    let alpha = spec.nb_alpha;
    let log_prior = rows_per_class.iter().map(|&n| log_prior(n, n_rows)).collect();
    let log_denom = counts
        .iter()
        .map(|row| log_denom(row.iter().sum(), alpha, n_features))
        .collect();
    let log_numer = counts
        .iter()
        .map(|row| row.iter().map(|&n| log_numer(n, alpha)).collect())
        .collect();
    Ok(NaiveBayes {
        classes,
        n_features,
        log_prior,
        log_numer,
        log_denom,
    })
}

pub(crate) fn class_slots(classes: &[Tag]) -> [usize; 3] {
    let mut slot = [usize::MAX; 3];
    for (i, t) in classes.iter().enumerate() {
        slot[t.index()] = i;
    }
    slot
}

impl NaiveBayes {
    pub fn classes(&self) -> &[Tag] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    /// `ln P(feature | classes[class])`.
    pub fn log_likelihood(&self, class: usize, feature: usize) -> f64 {
        self.log_numer[class][feature] - self.log_denom[class]
    }

    /// Unnormalized log posterior of each class for one row.
    pub fn joint_log_scores(&self, x: &FeatureMatrix, r: usize) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                let mut acc = 0.0;
                let mut len = 0u64;
                for (f, v) in x.row(r) {
                    acc += v as f64 * self.log_numer[c][f];
                    len += v as u64;
                }
                class_score(self.log_prior[c], acc, len, self.log_denom[c])
            })
            .collect()
    }

    /// Normalized posterior over `classes()` for one row.
    pub fn posterior(&self, x: &FeatureMatrix, r: usize) -> Vec<f64> {
        let scores = self.joint_log_scores(x, r);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<Tag> {
        (0..x.n_rows())
            .map(|r| self.classes[argmax(&self.joint_log_scores(x, r))])
            .collect()
    }

    pub(crate) fn to_text(&self) -> String {
        let mut out = String::from("nb 1\n");
        out.push_str(&classes_line(&self.classes));
        out.push('\n');
        out.push_str(&format!("features {}\n", self.n_features));
        out.push_str(&format!("prior {}\n", fmt_row(&self.log_prior)));
        out.push_str(&format!("denom {}\n", fmt_row(&self.log_denom)));
        for (c, row) in self.classes.iter().zip(&self.log_numer) {
            out.push_str(&format!("numer {c}"));
            if !row.is_empty() {
                out.push(' ');
                out.push_str(&fmt_row(row));
            }
            out.push('\n');
        }
        out
    }

    pub(crate) fn parse_body(lines: &mut ModelLines<'_>) -> Result<Self, ClassifierError> {
        let classes = {
            let f = lines.keyed("classes")?;
            lines.tags(&f)?
        };
        let n_features = lines.keyed_usize("features")?;
        let k = classes.len();
        let log_prior = {
            let f = lines.keyed("prior")?;
            lines.floats(&f, k)?
        };
        let log_denom = {
            let f = lines.keyed("denom")?;
            lines.floats(&f, k)?
        };
        let mut log_numer = Vec::with_capacity(k);
        for c in &classes {
            let f = lines.keyed("numer")?;
            if f.first() != Some(&c.as_str()) {
                return Err(lines.error("numer rows out of class order"));
            }
            log_numer.push(lines.floats(&f[1..], n_features)?);
        }
        Ok(NaiveBayes {
            classes,
            n_features,
            log_prior,
            log_numer,
            log_denom,
        })
    }
}
