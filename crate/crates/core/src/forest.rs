//! Random forest of Gini-split decision trees.
//!
//! Each tree is grown on a bootstrap resample; at every node a random subset of
//! features is searched for the threshold with the lowest weighted Gini impurity.
//! Per-tree randomness comes from a ChaCha stream keyed by `(seed, tree index)`, so
//! results do not depend on how many threads train the trees.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const MODEL_FORMAT_HEADER: &str = "envelope-forest v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            // ⌈√6⌉
            features_per_split: 3,
            seed: 42,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.features_per_split == 0 || self.features_per_split > n_features {
            return Err(Error::Config(format!(
                "features_per_split must lie in [1, {n_features}], got {}",
                self.features_per_split
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedForest {
    pub trees: Vec<DecisionTree>,
    pub class_names: Vec<String>,
    pub n_features: usize,
    pub config: ForestConfig,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct Grower<'a, R> {
    x: &'a [R],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    config: &'a ForestConfig,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl<R: AsRef<[f64]>> Grower<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || idx.len() < 2 * self.config.min_leaf {
            return self.push(Node::Leaf { counts });
        }
        let Some(best) = self.best_split(idx, rng) else {
            return self.push(Node::Leaf { counts });
        };

        // partition in place: left = x[f] <= threshold
        let mut mid = 0;
        for i in 0..idx.len() {
            if self.x[idx[i]].as_ref()[best.feature] <= best.threshold {
                idx.swap(i, mid);
                mid += 1;
            }
        }
        let slot = self.push(Node::Leaf { counts: Vec::new() });
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        slot
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Searches `features_per_split` random features; if none of them admits a
    /// valid split, keeps drawing from the remaining features.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let mut features: Vec<usize> = (0..self.n_features).collect();
        features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.config.features_per_split && best.is_some() {
                break;
            }
            if let Some(cand) = self.best_threshold(idx, f) {
                if best.as_ref().is_none_or(|b| cand.impurity < b.impurity) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn best_threshold(&self, idx: &[usize], feature: usize) -> Option<BestSplit> {
        let mut order: Vec<(f64, usize)> = idx
            .iter()
            .map(|&i| (self.x[i].as_ref()[feature], self.y[i]))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let n = order.len();
        let min_leaf = self.config.min_leaf;
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &(_, c) in &order {
            right[c] += 1;
        }
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            let c = order[i].1;
            left[c] += 1;
            right[c] -= 1;
            let n_left = i + 1;
            let n_right = n - n_left;
            if order[i].0 == order[i + 1].0 || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let impurity = (n_left as f64 * gini(&left, n_left)
                + n_right as f64 * gini(&right, n_right))
                / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let (lo, hi) = (order[i].0, order[i + 1].0);
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi || !threshold.is_finite() {
                    threshold = lo;
                }
                best = Some(BestSplit {
                    feature,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }
}

/// Bootstrap sample indices for one tree: `n` draws with replacement.
pub fn bootstrap_indices(seed: u64, tree: usize, n: usize) -> Vec<usize> {
    let mut rng = tree_rng(seed, tree);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

/// Trains on raw rows; `y` holds class indices `< n_classes`.
pub fn train_matrix<R: AsRef<[f64]> + Sync>(
    x: &[R],
    y: &[usize],
    class_names: Vec<String>,
    config: ForestConfig,
) -> Result<TrainedForest> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Training(
            "feature and label counts differ or are zero".into(),
        ));
    }
    let n_features = x[0].as_ref().len();
    if x.iter().any(|r| r.as_ref().len() != n_features) {
        return Err(Error::Training("ragged feature rows".into()));
    }
    config.validate(n_features)?;
    let n_classes = class_names.len();
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::Training("label outside class set".into()));
    }
    let mut per_class = vec![0usize; n_classes];
    for &c in y {
        per_class[c] += 1;
    }
    let present = per_class.iter().filter(|&&c| c > 0).count();
    if present < 2 || per_class.iter().any(|&c| c > 0 && c < 2) {
        return Err(Error::Training(
            "need at least 2 classes with at least 2 rows each".into(),
        ));
    }

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(config.seed, t);
            let mut idx: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
            let mut grower = Grower {
                x,
                y,
                n_classes,
                n_features,
                config: &config,
                nodes: Vec::new(),
            };
            grower.grow(&mut idx, 0, &mut rng);
            DecisionTree {
                nodes: grower.nodes,
            }
        })
        .collect();
    Ok(TrainedForest {
        trees,
        class_names,
        n_features,
        config,
    })
}

pub fn train(train_set: &LabeledDataset, config: ForestConfig) -> Result<TrainedForest> {
    train_matrix(
        &train_set.features(),
        &train_set.labels(),
        train_set.class_names.clone(),
        config,
    )
}

impl TrainedForest {
    /// Mean of per-tree leaf class frequencies.
    pub fn predict_proba_row(&self, x: &[f64]) -> Vec<f64> {
        let k = self.class_names.len();
        let mut p = vec![0.0; k];
        for tree in &self.trees {
            let counts = tree.leaf_counts(x);
            let total: usize = counts.iter().sum();
            for (pi, &c) in p.iter_mut().zip(counts) {
                *pi += c as f64 / total as f64;
            }
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= n);
        p
    }

    pub fn predict_proba(&self, features: &FeatureVector) -> Vec<f64> {
        self.predict_proba_row(&features.to_array())
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        argmax(&self.predict_proba_row(x))
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MODEL_FORMAT_HEADER}")?;
        serde_json::to_writer(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn load<R: BufRead>(mut input: R) -> Result<TrainedForest> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        if header.trim_end() != MODEL_FORMAT_HEADER {
            return Err(Error::ModelFormat(format!(
                "expected header '{MODEL_FORMAT_HEADER}', found '{}'",
                header.trim_end()
            )));
        }
        let forest: TrainedForest = serde_json::from_reader(input)?;
        if forest.trees.is_empty() || forest.n_features == 0 {
            return Err(Error::ModelFormat("model has no trees".into()));
        }
        Ok(forest)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
