//! Multinomial naive Bayes, multinomial logistic regression and a CART
//! decision tree behind one train/predict contract.
//!
//! Every model keeps the classes seen at training time in canonical order
//! (EN < HI < NE); argmax ties always resolve to the earliest class.

pub mod logreg;
pub mod nb;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::Tag;
use crate::ngram::FeatureMatrix;

pub use logreg::LogisticRegression;
pub use nb::NaiveBayes;
pub use tree::DecisionTree;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training set has no rows")]
    EmptyTrainingSet,
    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("training diverged at iteration {iteration}: loss is not finite")]
    Divergence { iteration: usize },
    #[error("model expects {expected} features, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("invalid hyperparameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierKind {
    NaiveBayes,
    LogisticRegression,
    DecisionTree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
        ClassifierKind::DecisionTree,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::DecisionTree => "tree",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb" | "naive-bayes" => Ok(ClassifierKind::NaiveBayes),
            "lr" | "logreg" | "logistic-regression" => Ok(ClassifierKind::LogisticRegression),
            "tree" | "dt" | "decision-tree" => Ok(ClassifierKind::DecisionTree),
            other => Err(ClassifierError::BadParameter(format!("unknown classifier `{other}`"))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Classifier choice plus every hyperparameter of every kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub nb_alpha: f64,
    pub lr_l2: f64,
    pub lr_lr: f64,
    pub lr_max_iter: usize,
    pub lr_tol: f64,
    pub tree_max_depth: Option<usize>,
    pub tree_min_leaf: usize,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            nb_alpha: 1.0,
            lr_l2: 1e-4,
            lr_lr: 0.1,
            lr_max_iter: 500,
            lr_tol: 1e-6,
            tree_max_depth: None,
            tree_min_leaf: 1,
            seed: 0,
        }
    }

    pub fn naive_bayes() -> Self {
        Self::new(ClassifierKind::NaiveBayes)
    }

    pub fn logistic_regression() -> Self {
        Self::new(ClassifierKind::LogisticRegression)
    }

    pub fn decision_tree() -> Self {
        Self::new(ClassifierKind::DecisionTree)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::BadParameter(m.to_string()));
        if !(self.nb_alpha >= 0.0 && self.nb_alpha.is_finite()) {
            return bad("nb_alpha must be >= 0");
        }
        if !(self.lr_l2 >= 0.0 && self.lr_l2.is_finite()) {
            return bad("lr_l2 must be >= 0");
        }
        if !(self.lr_lr > 0.0 && self.lr_lr.is_finite()) {
            return bad("lr_lr must be > 0");
        }
        if !(self.lr_tol >= 0.0) {
            return bad("lr_tol must be >= 0");
        }
        if self.tree_min_leaf == 0 {
            return bad("tree_min_leaf must be >= 1");
        }
        Ok(())
    }

    /// Compact description carrying the hyperparameters that matter for
    /// `kind`, e.g. `lr[l2=0.0001;lr=0.1;max_iter=500;tol=0.000001]`.
    pub fn describe(&self) -> String {
        match self.kind {
            ClassifierKind::NaiveBayes => format!("nb[alpha={}]", self.nb_alpha),
            ClassifierKind::LogisticRegression => format!(
                "lr[l2={};lr={};max_iter={};tol={}]",
                self.lr_l2, self.lr_lr, self.lr_max_iter, self.lr_tol
            ),
            ClassifierKind::DecisionTree => format!(
                "tree[max_depth={};min_leaf={}]",
                self.tree_max_depth.map_or("none".to_string(), |d| d.to_string()),
                self.tree_min_leaf
            ),
        }
    }

    /// Inverse of [`ClassifierSpec::describe`]; parameters not mentioned
    /// keep their defaults.
    pub fn parse_description(s: &str, seed: u64) -> Result<Self, ClassifierError> {
        let bad = || ClassifierError::BadParameter(format!("cannot parse classifier `{s}`"));
        let (kind, params) = match s.split_once('[') {
            Some((k, rest)) => (k, rest.strip_suffix(']').ok_or_else(bad)?),
            None => (s, ""),
        };
        let mut spec = ClassifierSpec::new(kind.parse()?);
        spec.seed = seed;
        for kv in params.split(';').filter(|p| !p.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(bad)?;
            let float = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "alpha" => spec.nb_alpha = float()?,
                "l2" => spec.lr_l2 = float()?,
                "lr" => spec.lr_lr = float()?,
                "max_iter" => spec.lr_max_iter = int()?,
                "tol" => spec.lr_tol = float()?,
                "max_depth" => spec.tree_max_depth = if value == "none" { None } else { Some(int()?) },
                "min_leaf" => spec.tree_min_leaf = int()?,
                _ => return Err(bad()),
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    NaiveBayes(NaiveBayes),
    LogisticRegression(LogisticRegression),
    DecisionTree(DecisionTree),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            TrainedModel::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            TrainedModel::DecisionTree(_) => ClassifierKind::DecisionTree,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.n_features(),
            TrainedModel::LogisticRegression(m) => m.n_features(),
            TrainedModel::DecisionTree(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Tag>, ClassifierError> {
        if x.n_cols() != self.n_features() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.n_features(),
                found: x.n_cols(),
            });
        }
        Ok(match self {
            TrainedModel::NaiveBayes(m) => m.predict(x),
            TrainedModel::LogisticRegression(m) => m.predict(x),
            TrainedModel::DecisionTree(m) => m.predict(x),
        })
    }

    /// Versioned text serialization with 17 significant digits.
    pub fn to_text(&self) -> String {
        match self {
            TrainedModel::NaiveBayes(m) => m.to_text(),
            TrainedModel::LogisticRegression(m) => m.to_text(),
            TrainedModel::DecisionTree(m) => m.to_text(),
        }
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifierError> {
        let mut lines = ModelLines::new(text);
        let header = lines.next_fields()?;
        match header.as_slice() {
            ["nb", "1"] => Ok(TrainedModel::NaiveBayes(NaiveBayes::parse_body(&mut lines)?)),
            ["logreg", "1"] => Ok(TrainedModel::LogisticRegression(LogisticRegression::parse_body(
                &mut lines,
            )?)),
            ["tree", "1"] => Ok(TrainedModel::DecisionTree(DecisionTree::parse_body(&mut lines)?)),
            _ => Err(lines.error("unknown model header")),
        }
    }
}

pub fn train(x: &FeatureMatrix, spec: &ClassifierSpec) -> Result<TrainedModel, ClassifierError> {
    spec.validate()?;
    Ok(match spec.kind {
        ClassifierKind::NaiveBayes => TrainedModel::NaiveBayes(nb::train_nb(x, spec)?),
        ClassifierKind::LogisticRegression => {
            TrainedModel::LogisticRegression(logreg::train_logreg(x, spec)?)
        }
        ClassifierKind::DecisionTree => TrainedModel::DecisionTree(tree::train_tree(x, spec)?),
    })
}

pub fn accuracy(pred: &[Tag], gold: &[Tag]) -> Result<f64, ClassifierError> {
    if pred.len() != gold.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: gold.len(),
            found: pred.len(),
        });
    }
    if gold.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Classes present in `labels`, canonical order.
pub(crate) fn present_classes(labels: &[Tag]) -> Vec<Tag> {
    let mut seen = [false; 3];
    for t in labels {
        seen[t.index()] = true;
    }
    Tag::ALL.into_iter().filter(|t| seen[t.index()]).collect()
}

/// Index of the first maximum; `-inf` entries lose to anything finite and
/// NaN never wins.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] || scores[best].is_nan() {
            best = i;
        }
    }
    best
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ")
}

/// Line cursor for the model text format.
pub(crate) struct ModelLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> ModelLines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        ModelLines {
            lines: text.lines().enumerate(),
            line_no: 0,
        }
    }

    pub(crate) fn error(&self, reason: &str) -> ClassifierError {
        ClassifierError::Format {
            line: self.line_no,
            reason: reason.to_string(),
        }
    }

    pub(crate) fn next_fields(&mut self) -> Result<Vec<&'a str>, ClassifierError> {
        for (i, line) in self.lines.by_ref() {
            self.line_no = i + 1;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            return Ok(line.split_whitespace().collect());
        }
        Err(self.error("unexpected end of model"))
    }

    /// Next line must be `key v1 v2 ...`; returns the values.
    pub(crate) fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, ClassifierError> {
        let fields = self.next_fields()?;
        match fields.split_first() {
            Some((k, rest)) if *k == key => Ok(rest.to_vec()),
            _ => Err(self.error(&format!("expected `{key}`"))),
        }
    }

    pub(crate) fn keyed_usize(&mut self, key: &str) -> Result<usize, ClassifierError> {
        let v = self.keyed(key)?;
        match v.as_slice() {
            [x] => x.parse().map_err(|_| self.error("bad integer")),
            _ => Err(self.error("expected one integer")),
        }
    }

    pub(crate) fn floats(&self, fields: &[&str], n: usize) -> Result<Vec<f64>, ClassifierError> {
        if fields.len() != n {
            return Err(self.error(&format!("expected {n} values, found {}", fields.len())));
        }
        fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| self.error("bad number")))
            .collect()
    }

    pub(crate) fn tags(&self, fields: &[&str]) -> Result<Vec<Tag>, ClassifierError> {
        fields
            .iter()
            .map(|f| f.parse::<Tag>().map_err(|e| self.error(&e.to_string())))
            .collect()
    }
}

pub(crate) fn classes_line(classes: &[Tag]) -> String {
    let names: Vec<&str> = classes.iter().map(|t| t.as_str()).collect();
    format!("classes {}", names.join(" "))
}
