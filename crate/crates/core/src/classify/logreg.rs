//! Multinomial (softmax) logistic regression trained by full-batch
//! gradient descent on the L2-regularized mean cross-entropy.

use super::nb::class_slots;
use super::{argmax, classes_line, fmt_row, present_classes, ClassifierError, ClassifierSpec, ModelLines};
use crate::corpus::Tag;
use crate::ngram::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    classes: Vec<Tag>,
    n_features: usize,
    /// Feature-major: `weights[f * n_classes + c]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    iterations: usize,
}

/// Parameters of a softmax model in the layout used by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxParams {
    pub n_classes: usize,
    pub n_features: usize,
    /// Feature-major `f * n_classes + c`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SoftmaxParams {
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        SoftmaxParams {
            n_classes,
            n_features,
            weights: vec![0.0; n_classes * n_features],
            bias: vec![0.0; n_classes],
        }
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

fn logits(x: &FeatureMatrix, r: usize, p: &SoftmaxParams, out: &mut [f64]) {
    out.copy_from_slice(&p.bias);
    let k = p.n_classes;
    for (f, v) in x.row(r) {
        let w = &p.weights[f * k..(f + 1) * k];
        let v = v as f64;
        for c in 0..k {
            out[c] += v * w[c];
        }
    }
}

/// Mean cross-entropy plus `l2/2·‖W‖²` (bias unpenalized) and its gradient
/// in the same layout as `params`. `targets[r]` is the class slot of row r.
pub fn loss_and_gradient(
    x: &FeatureMatrix,
    targets: &[usize],
    params: &SoftmaxParams,
    l2: f64,
) -> (f64, SoftmaxParams) {
    let k = params.n_classes;
    let n = x.n_rows() as f64;
    let mut grad = SoftmaxParams {
        n_classes: k,
        n_features: params.n_features,
        weights: params.weights.iter().map(|w| l2 * w).collect(),
        bias: vec![0.0; k],
    };
    let mut loss = 0.0;
    let mut z = vec![0.0; k];
    for (r, &y) in targets.iter().enumerate() {
        logits(x, r, params, &mut z);
        softmax_in_place(&mut z);
        loss -= z[y].ln();
        z[y] -= 1.0;
        for c in 0..k {
            z[c] /= n;
            grad.bias[c] += z[c];
        }
        for (f, v) in x.row(r) {
            let g = &mut grad.weights[f * k..(f + 1) * k];
            let v = v as f64;
            for c in 0..k {
                g[c] += v * z[c];
            }
        }
    }
    let penalty: f64 = params.weights.iter().map(|w| w * w).sum();
    (loss / n + 0.5 * l2 * penalty, grad)
}

/// Train and also return the loss at each evaluated iterate.
pub fn train_logreg_with_history(
    x: &FeatureMatrix,
    spec: &ClassifierSpec,
) -> Result<(LogisticRegression, Vec<f64>), ClassifierError> {
    if x.n_rows() == 0 {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let classes = present_classes(x.labels());
    if classes.len() < 2 {
        return Err(ClassifierError::TooFewClasses(classes.len()));
    }
    let slot = class_slots(&classes);
    let targets: Vec<usize> = x.labels().iter().map(|t| slot[t.index()]).collect();
    let mut params = SoftmaxParams::zeros(classes.len(), x.n_cols());
    let mut history = Vec::new();
    let mut iterations = 0;
    for it in 0..spec.lr_max_iter {
        let (loss, grad) = loss_and_gradient(x, &targets, &params, spec.lr_l2);
        if !loss.is_finite() {
            return Err(ClassifierError::Divergence { iteration: it });
        }
        history.push(loss);
        let max_grad = grad
            .weights
            .iter()
            .chain(&grad.bias)
            .fold(0.0f64, |m, g| m.max(g.abs()));
        if max_grad < spec.lr_tol {
            break;
        }
        for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
            *w -= spec.lr_lr * g;
        }
        for (b, g) in params.bias.iter_mut().zip(&grad.bias) {
            *b -= spec.lr_lr * g;
        }
        iterations = it + 1;
    }
    if params.weights.iter().chain(&params.bias).any(|w| !w.is_finite()) {
        return Err(ClassifierError::Divergence { iteration: iterations });
    }
    let model = LogisticRegression {
        classes,
        n_features: x.n_cols(),
        weights: params.weights,
        bias: params.bias,
        iterations,
    };
    Ok((model, history))
}

pub fn train_logreg(x: &FeatureMatrix, spec: &ClassifierSpec) -> Result<LogisticRegression, ClassifierError> {
    train_logreg_with_history(x, spec).map(|(m, _)| m)
}

impl LogisticRegression {
    pub fn classes(&self) -> &[Tag] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn weight(&self, class: usize, feature: usize) -> f64 {
        self.weights[feature * self.classes.len() + class]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// L2 norm of one feature's weights across classes.
    pub fn feature_importance(&self, feature: usize) -> f64 {
        let k = self.classes.len();
        self.weights[feature * k..(feature + 1) * k]
            .iter()
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt()
    }

    fn params(&self) -> SoftmaxParams {
        SoftmaxParams {
            n_classes: self.classes.len(),
            n_features: self.n_features,
            weights: self.weights.clone(),
            bias: self.bias.clone(),
        }
    }

    pub fn predict_proba(&self, x: &FeatureMatrix, r: usize) -> Vec<f64> {
        let mut z = vec![0.0; self.classes.len()];
        logits(x, r, &self.params(), &mut z);
        softmax_in_place(&mut z);
        z
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<Tag> {
        let params = self.params();
        let mut z = vec![0.0; self.classes.len()];
        (0..x.n_rows())
            .map(|r| {
                logits(x, r, &params, &mut z);
                self.classes[argmax(&z)]
            })
            .collect()
    }

    pub(crate) fn to_text(&self) -> String {
        let k = self.classes.len();
        let mut out = String::from("logreg 1\n");
        out.push_str(&classes_line(&self.classes));
        out.push('\n');
        out.push_str(&format!("features {}\n", self.n_features));
        out.push_str(&format!("iterations {}\n", self.iterations));
        out.push_str(&format!("bias {}\n", fmt_row(&self.bias)));
        for (c, tag) in self.classes.iter().enumerate() {
            let row: Vec<f64> = (0..self.n_features).map(|f| self.weights[f * k + c]).collect();
            out.push_str(&format!("weights {tag}"));
            if !row.is_empty() {
                out.push(' ');
                out.push_str(&fmt_row(&row));
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
        let iterations = lines.keyed_usize("iterations")?;
        let k = classes.len();
        let bias = {
            let f = lines.keyed("bias")?;
            lines.floats(&f, k)?
        };
        let mut weights = vec![0.0; k * n_features];
        for (c, tag) in classes.iter().enumerate() {
            let f = lines.keyed("weights")?;
            if f.first() != Some(&tag.as_str()) {
                return Err(lines.error("weight rows out of class order"));
            }
            for (j, w) in lines.floats(&f[1..], n_features)?.into_iter().enumerate() {
                weights[j * k + c] = w;
            }
        }
        Ok(LogisticRegression {
            classes,
            n_features,
            weights,
            bias,
            iterations,
        })
    }
}
