//! Gradient boosting on weighted logistic loss over exact-greedy regression
//! trees. Scores start at the weighted prior log-odds; each round fits a
//! depth-bounded tree to the negative gradients (weighted residuals
//! `y - p`) and adds it, scaled by the shrinkage, to the scores. Class
//! weights let the minority idiomatic class dominate the fit.

use std::path::Path;

use crate::container::Container;
use crate::mat::Matrix;

use super::IdiomError;

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtHyper {
    pub n_estimators: usize,
    /// Minimum weighted example count per leaf.
    pub min_leaf: f64,
    pub shrinkage: f64,
    pub max_depth: usize,
    /// Example weight per class, indexed by label.
    pub class_weights: [f64; 2],
}

impl Default for GbdtHyper {
    fn default() -> GbdtHyper {
        GbdtHyper {
            n_estimators: 200,
            min_leaf: 25.0,
            shrinkage: 0.1,
            max_depth: 3,
            class_weights: [1.0, 10.0],
        }
    }
}

/// Flat node layout. Internal nodes carry `feature >= 0` and child indices;
/// leaves carry `feature == -1` and a value (shrinkage already applied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub feature: i32,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub value: f64,
}

impl TreeNode {
    fn leaf(value: f64) -> TreeNode {
        TreeNode {
            feature: -1,
            threshold: 0.0,
            left: -1,
            right: -1,
            value,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature < 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Walk from the root; `x[feature] <= threshold` goes left.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.is_leaf() {
                return node.value;
            }
            idx = if x[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub trees: Vec<Tree>,
    pub init_score: f64,
    pub hyper: GbdtHyper,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weighted mean logistic loss at the given scores.
fn weighted_loss(scores: &[f64], y: &[u8], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&s, &yi), &w) in scores.iter().zip(y.iter()).zip(weights.iter()) {
        // softplus(-s) + (1-y)·s, numerically stable.
        let softplus = (-s).max(0.0) + (-(-s).abs()).exp().ln_1p();
        num += w * (softplus + (1.0 - yi as f64) * s);
        den += w;
    }
    num / den
}

struct TreeFitter<'a> {
    x: &'a [Vec<f64>],
    residuals: &'a [f64],
    weights: &'a [f64],
    /// Per feature, example indices sorted by feature value.
    order: &'a [Vec<u32>],
    hyper: &'a GbdtHyper,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> TreeFitter<'a> {
    /// Weighted SSE reduction of splitting `members` at the best
    /// (feature, threshold); thresholds are midpoints between consecutive
    /// distinct values, pre-rounded to f32 so the stored tree reproduces
    /// the fit-time partition exactly.
    fn find_split(&self, members: &[u32], in_node: &[bool]) -> Option<BestSplit> {
        let total_w: f64 = members.iter().map(|&i| self.weights[i as usize]).sum();
        let total_s: f64 = members
            .iter()
            .map(|&i| self.weights[i as usize] * self.residuals[i as usize])
            .sum();
        if total_w < 2.0 * self.hyper.min_leaf {
            return None;
        }
        let parent = total_s * total_s / total_w;
        let mut best: Option<BestSplit> = None;
        let n_features = self.x[0].len();
        for f in 0..n_features {
            let mut wl = 0.0;
            let mut sl = 0.0;
            let sorted = &self.order[f];
            let mut prev_value: Option<f64> = None;
            for &i in sorted.iter() {
                let i = i as usize;
                if !in_node[i] {
                    continue;
                }
                let value = self.x[i][f];
                if let Some(pv) = prev_value {
                    if value > pv {
                        let threshold = (pv + (value - pv) / 2.0) as f32 as f64;
                        // The f32 rounding must keep the partition: left
                        // values <= t < right values.
                        if pv <= threshold && threshold < value {
                            let wr = total_w - wl;
                            let sr = total_s - sl;
                            if wl >= self.hyper.min_leaf && wr >= self.hyper.min_leaf {
                                let gain = sl * sl / wl + sr * sr / wr - parent;
                                let better = match &best {
                                    None => gain > 1e-12,
                                    Some(b) => gain > b.gain,
                                };
                                if better {
                                    best = Some(BestSplit {
                                        feature: f,
                                        threshold,
                                        gain,
                                    });
                                }
                            }
                        }
                    }
                }
                wl += self.weights[i];
                sl += self.weights[i] * self.residuals[i];
                prev_value = Some(value);
            }
        }
        best
    }

    fn build(&mut self, members: Vec<u32>, in_node: &mut [bool], depth: usize) -> i32 {
        let node_id = self.nodes.len() as i32;
        let w: f64 = members.iter().map(|&i| self.weights[i as usize]).sum();
        let s: f64 = members
            .iter()
            .map(|&i| self.weights[i as usize] * self.residuals[i as usize])
            .sum();
        // Leaf value: weighted mean residual with shrinkage baked in,
        // rounded to f32 so serialization is exact.
        let leaf_value = (self.hyper.shrinkage * if w > 0.0 { s / w } else { 0.0 }) as f32 as f64;

        if depth >= self.hyper.max_depth {
            self.nodes.push(TreeNode::leaf(leaf_value));
            return node_id;
        }
        for &i in &members {
            in_node[i as usize] = true;
        }
        let split = self.find_split(&members, in_node);
        for &i in &members {
            in_node[i as usize] = false;
        }
        let Some(split) = split else {
            self.nodes.push(TreeNode::leaf(leaf_value));
            return node_id;
        };

        let (left, right): (Vec<u32>, Vec<u32>) = members
            .iter()
            .partition(|&&i| self.x[i as usize][split.feature] <= split.threshold);
        self.nodes.push(TreeNode {
            feature: split.feature as i32,
            threshold: split.threshold,
            left: -1,
            right: -1,
            value: 0.0,
        });
        let left_id = self.build(left, in_node, depth + 1);
        let right_id = self.build(right, in_node, depth + 1);
        self.nodes[node_id as usize].left = left_id;
        self.nodes[node_id as usize].right = right_id;
        node_id
    }
}

/// Train the boosted ensemble. Returns the model and the weighted training
/// loss after each round (the curve is non-increasing).
pub fn train_gbdt(
    x: &[Vec<f64>],
    y: &[u8],
    hyper: &GbdtHyper,
) -> Result<(GbdtModel, Vec<f64>), IdiomError> {
    if x.len() < 2 {
        return Err(IdiomError::TooFewExamples(x.len()));
    }
    assert_eq!(x.len(), y.len(), "features and labels must align");
    if y.iter().all(|&v| v == 0) || y.iter().all(|&v| v == 1) {
        return Err(IdiomError::SingleClass);
    }
    let dim = x[0].len();
    for xi in x {
        if xi.len() != dim {
            return Err(IdiomError::DimensionMismatch {
                expected: dim,
                found: xi.len(),
            });
        }
    }

    let n = x.len();
    let weights: Vec<f64> = y.iter().map(|&yi| hyper.class_weights[yi as usize]).collect();
    let w_pos: f64 = y
        .iter()
        .zip(weights.iter())
        .filter(|(&yi, _)| yi == 1)
        .map(|(_, &w)| w)
        .sum();
    let w_neg: f64 = weights.iter().sum::<f64>() - w_pos;
    let init_score = (w_pos / w_neg).ln();

    // Presort every feature once; (value, index) order makes ties stable.
    let order: Vec<Vec<u32>> = (0..dim)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x[a as usize][f]
                    .partial_cmp(&x[b as usize][f])
                    .expect("finite feature values")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut scores = vec![init_score; n];
    let mut trees = Vec::with_capacity(hyper.n_estimators);
    let mut round_losses = Vec::with_capacity(hyper.n_estimators);
    let mut residuals = vec![0.0; n];
    let mut in_node = vec![false; n];
    for _ in 0..hyper.n_estimators {
        for (r, (&s, &yi)) in residuals.iter_mut().zip(scores.iter().zip(y.iter())) {
            *r = yi as f64 - sigmoid(s);
        }
        let mut fitter = TreeFitter {
            x,
            residuals: &residuals,
            weights: &weights,
            order: &order,
            hyper,
            nodes: Vec::new(),
        };
        fitter.build((0..n as u32).collect(), &mut in_node, 0);
        let tree = Tree {
            nodes: fitter.nodes,
        };
        for (s, xi) in scores.iter_mut().zip(x.iter()) {
            *s += tree.predict(xi);
        }
        trees.push(tree);
        round_losses.push(weighted_loss(&scores, y, &weights));
    }

    Ok((
        GbdtModel {
            trees,
            init_score,
            hyper: hyper.clone(),
        },
        round_losses,
    ))
}

/// `p = σ(init + Σ tree outputs)`, label 1 iff p ≥ 0.5.
pub fn predict_gbdt(model: &GbdtModel, x: &[f64]) -> Result<(u8, f64), IdiomError> {
    for tree in &model.trees {
        for node in &tree.nodes {
            if !node.is_leaf() && node.feature as usize >= x.len() {
                return Err(IdiomError::DimensionMismatch {
                    expected: node.feature as usize + 1,
                    found: x.len(),
                });
            }
        }
    }
    let mut score = model.init_score;
    for tree in &model.trees {
        score += tree.predict(x);
    }
    let p = sigmoid(score);
    Ok((u8::from(p >= 0.5), p))
}

pub fn save_gbdt(path: &Path, model: &GbdtModel) -> Result<(), IdiomError> {
    let mut c = Container::new();
    c.push_entry("kind", "gbdt");
    c.push_entry("n_estimators", model.hyper.n_estimators);
    c.push_entry("min_leaf", model.hyper.min_leaf);
    c.push_entry("shrinkage", model.hyper.shrinkage);
    c.push_entry("max_depth", model.hyper.max_depth);
    c.push_entry("w0", model.hyper.class_weights[0]);
    c.push_entry("w1", model.hyper.class_weights[1]);
    c.push_entry("init_score", model.init_score);
    c.push_entry("n_trees", model.trees.len());
    c.push_entry("feature_order", "compound,modifier,head");
    for (k, tree) in model.trees.iter().enumerate() {
        let mut data = Vec::with_capacity(tree.nodes.len() * 5);
        for node in &tree.nodes {
            data.extend_from_slice(&[
                node.feature as f64,
                node.threshold,
                node.left as f64,
                node.right as f64,
                node.value,
            ]);
        }
        c.push_block(&format!("tree.{k}"), Matrix::from_vec(tree.nodes.len(), 5, data));
    }
    c.write(path)?;
    Ok(())
}

pub fn load_gbdt(path: &Path) -> Result<GbdtModel, IdiomError> {
    let c = Container::read(path)?;
    if c.require("kind")? != "gbdt" {
        return Err(IdiomError::InvalidModel(format!(
            "expected kind=gbdt, found {}",
            c.require("kind")?
        )));
    }
    let hyper = GbdtHyper {
        n_estimators: c.parse("n_estimators")?,
        min_leaf: c.parse("min_leaf")?,
        shrinkage: c.parse("shrinkage")?,
        max_depth: c.parse("max_depth")?,
        class_weights: [c.parse("w0")?, c.parse("w1")?],
    };
    let n_trees: usize = c.parse("n_trees")?;
    let mut trees = Vec::with_capacity(n_trees);
    for k in 0..n_trees {
        let m = c.block(&format!("tree.{k}"))?;
        if m.cols() != 5 {
            return Err(IdiomError::InvalidModel(format!(
                "tree.{k} has {} columns, expected 5",
                m.cols()
            )));
        }
        let mut nodes = Vec::with_capacity(m.rows());
        for r in 0..m.rows() {
            let row = m.row(r);
            nodes.push(TreeNode {
                feature: row[0] as i32,
                threshold: row[1],
                left: row[2] as i32,
                right: row[3] as i32,
                value: row[4],
            });
        }
        trees.push(Tree { nodes });
    }
    Ok(GbdtModel {
        trees,
        init_score: c.parse("init_score")?,
        hyper,
    })
}
