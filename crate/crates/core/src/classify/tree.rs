//! CART classification tree with binary `count <= threshold` splits chosen
//! by minimum weighted Gini impurity.
//!
//! Split quality is compared exactly: minimizing weighted Gini is the same
//! as maximizing `S_L/n_L + S_R/n_R` where `S` is the sum of squared class
//! counts of a child, so two candidates are compared by integer
//! cross-multiplication and ties are real ties.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{fmt_f64, ClassifierError, ClassifierSpec, ModelLines};
use crate::corpus::Tag;
use crate::ngram::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: Tag,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    n_features: usize,
    nodes: Vec<Node>,
}

/// A candidate split with its exact quality `num / den`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    num: u128,
    den: u128,
}

impl SplitChoice {
    /// Weighted Gini impurity of the two children.
    pub fn weighted_gini(&self, n: usize) -> f64 {
        1.0 - (self.num as f64 / self.den as f64) / n as f64
    }

    fn better_than(&self, other: &SplitChoice) -> bool {
        (self.num * other.den).cmp(&(other.num * self.den)) == Ordering::Greater
    }
}

type Hist = [usize; 3];

fn sq_sum(h: &Hist) -> u128 {
    h.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

fn total(h: &Hist) -> usize {
    h.iter().sum()
}

/// Majority class, ties to the canonically first class.
fn majority(h: &Hist) -> Tag {
    let mut best = 0;
    for i in 1..3 {
        if h[i] > h[best] {
            best = i;
        }
    }
    Tag::ALL[best]
}

fn histogram(x: &FeatureMatrix, rows: &[usize]) -> Hist {
    let mut h = [0; 3];
    for &r in rows {
        h[x.labels()[r].index()] += 1;
    }
    h
}

/// Best split of `rows` over all features, or `None` when no split leaves
/// at least `min_leaf` rows on both sides.
pub fn best_split(x: &FeatureMatrix, rows: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let node_hist = histogram(x, rows);
    let n = rows.len();
    // feature -> value -> class histogram, nonzero values only
    let mut per_feature: BTreeMap<usize, BTreeMap<u32, Hist>> = BTreeMap::new();
    for &r in rows {
        let label = x.labels()[r].index();
        for (f, v) in x.row(r) {
            per_feature.entry(f).or_default().entry(v).or_insert([0; 3])[label] += 1;
        }
    }
    let mut best: Option<SplitChoice> = None;
    for (feature, values) in per_feature {
        // implicit zeros are everything not stored
        let mut zero = node_hist;
        for h in values.values() {
            for c in 0..3 {
                zero[c] -= h[c];
            }
        }
        let mut levels: Vec<(f64, Hist)> = Vec::with_capacity(values.len() + 1);
        if total(&zero) > 0 {
            levels.push((0.0, zero));
        }
        levels.extend(values.into_iter().map(|(v, h)| (v as f64, h)));
        let mut left = [0usize; 3];
        for w in levels.windows(2) {
            for c in 0..3 {
                left[c] += w[0].1[c];
            }
            let n_left = total(&left);
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right = [
                node_hist[0] - left[0],
                node_hist[1] - left[1],
                node_hist[2] - left[2],
            ];
            let (nl, nr) = (n_left as u128, n_right as u128);
            let cand = SplitChoice {
                feature,
                threshold: (w[0].0 + w[1].0) / 2.0,
                num: sq_sum(&left) * nr + sq_sum(&right) * nl,
                den: nl * nr,
            };
            // features and thresholds are visited in ascending order, so a
            // strict improvement keeps the lowest (feature, threshold) on ties
            if best.as_ref().map_or(true, |b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn train_tree(x: &FeatureMatrix, spec: &ClassifierSpec) -> Result<DecisionTree, ClassifierError> {
    if x.n_rows() == 0 {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let mut tree = DecisionTree {
        n_features: x.n_cols(),
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    grow(&mut tree.nodes, x, rows, 0, spec);
    Ok(tree)
}

fn grow(nodes: &mut Vec<Node>, x: &FeatureMatrix, rows: Vec<usize>, depth: usize, spec: &ClassifierSpec) -> usize {
    let id = nodes.len();
    let hist = histogram(x, &rows);
    let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = spec.tree_max_depth.is_some_and(|d| depth >= d);
    let split = if pure || depth_capped || rows.len() < 2 * spec.tree_min_leaf {
        None
    } else {
        best_split(x, &rows, spec.tree_min_leaf)
    };
    let Some(split) = split else {
        nodes.push(Node::Leaf {
            class: majority(&hist),
        });
        return id;
    };
    nodes.push(Node::Leaf { class: Tag::En }); // placeholder until children exist
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| x.get(r, split.feature) as f64 <= split.threshold);
    let left = grow(nodes, x, left_rows, depth + 1, spec);
    let right = grow(nodes, x, right_rows, depth + 1, spec);
    nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

impl DecisionTree {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<Tag> {
        (0..x.n_rows())
            .map(|r| {
                let mut i = 0;
                loop {
                    match self.nodes[i] {
                        Node::Leaf { class } => break class,
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            i = if x.get(r, feature) as f64 <= threshold { left } else { right };
                        }
                    }
                }
            })
            .collect()
    }

    pub(crate) fn to_text(&self) -> String {
        let mut out = String::from("tree 1\n");
        out.push_str(&format!("features {}\n", self.n_features));
        out.push_str(&format!("nodes {}\n", self.nodes.len()));
        for node in &self.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => out.push_str(&format!("split {feature} {} {left} {right}\n", fmt_f64(*threshold))),
                Node::Leaf { class } => out.push_str(&format!("leaf {class}\n")),
            }
        }
        out
    }

    pub(crate) fn parse_body(lines: &mut ModelLines<'_>) -> Result<Self, ClassifierError> {
        let n_features = lines.keyed_usize("features")?;
        let n_nodes = lines.keyed_usize("nodes")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let f = lines.next_fields()?;
            let node = match f.as_slice() {
                ["leaf", tag] => Node::Leaf {
                    class: lines.tags(&[tag])?[0],
                },
                ["split", feature, threshold, left, right] => {
                    let int = |s: &str| s.parse::<usize>().map_err(|_| lines.error("bad integer"));
                    let (feature, left, right) = (int(feature)?, int(left)?, int(right)?);
                    if feature >= n_features || left >= n_nodes || right >= n_nodes {
                        return Err(lines.error("node reference out of range"));
                    }
                    Node::Split {
                        feature,
                        threshold: lines.floats(&[threshold], 1)?[0],
                        left,
                        right,
                    }
                }
                _ => return Err(lines.error("expected `leaf` or `split`")),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(lines.error("tree has no nodes"));
        }
        Ok(DecisionTree { n_features, nodes })
    }
}
