use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_training_set;
use crate::dataset::Instance;
use crate::error::{Error, Result};

/// Features tried at each split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `Sqrt` for sign targets, `Third` otherwise.
    #[default]
    Auto,
    Sqrt,
    Third,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(&self, d: usize, sign_targets: bool) -> usize {
        let k = match self {
            Self::Auto if sign_targets => (d as f64).sqrt().floor() as usize,
            Self::Auto => d / 3,
            Self::Sqrt => (d as f64).sqrt().floor() as usize,
            Self::Third => d / 3,
            Self::All => d,
            Self::Count(k) => *k,
        };
        k.clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_leaf: usize,
    pub seed: u64,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: MaxFeatures::Auto,
            min_leaf: 1,
            seed: 1,
            bootstrap: true,
        }
    }
}

impl RfParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("rf.n_trees must be > 0".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("rf.min_leaf must be >= 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::Config("rf.max_features count must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

struct Builder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [f64],
    mtry: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.ys[i]).sum::<f64>() / idx.len() as f64
    }

    /// Best split of `idx` on `feature`: (sse reduction, threshold, left size).
    fn best_on(&self, idx: &mut [usize], feature: usize) -> Option<(f64, f64, usize)> {
        idx.sort_by(|&a, &b| self.xs[a][feature].total_cmp(&self.xs[b][feature]));
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.ys[i]).sum();
        let base = total * total / n as f64;
        let mut left_sum = 0.0;
        let mut best: Option<(f64, f64, usize)> = None;
        for k in 1..n {
            left_sum += self.ys[idx[k - 1]];
            let (lo, hi) = (self.xs[idx[k - 1]][feature], self.xs[idx[k]][feature]);
            if lo == hi || k < self.min_leaf || n - k < self.min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64 - base;
            if gain > best.map_or(1e-12, |b| b.0) {
                let mid = lo + (hi - lo) / 2.0;
                // Guard against the midpoint rounding onto the upper value.
                let threshold = if mid < hi { mid } else { lo };
                best = Some((gain, threshold, k));
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], rng: &mut ChaCha8Rng) -> usize {
        let at = self.nodes.len();
        let value = self.mean(idx);
        self.nodes.push(Node::Leaf { value });
        let first = self.ys[idx[0]];
        if idx.len() < 2 * self.min_leaf || idx.iter().all(|&i| self.ys[i] == first) {
            return at;
        }
        let d = self.xs[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(rng);
        // Like common CART implementations, keep looking past the first
        // `mtry` features until some valid split turns up.
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.mtry && best.is_some() {
                break;
            }
            if let Some((gain, threshold, _)) = self.best_on(idx, f) {
                if best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, threshold, f, 0));
                }
            }
        }
        let Some((_, threshold, feature, _)) = best else {
            return at;
        };
        idx.sort_by(|&a, &b| self.xs[a][feature].total_cmp(&self.xs[b][feature]));
        let split = idx.partition_point(|&i| self.xs[i][feature] <= threshold);
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    /// Out-of-bag prediction per training instance; `None` if the instance
    /// was drawn into every bootstrap sample.
    pub oob: Vec<Option<f64>>,
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

pub fn fit_rf(train: &[Instance], hp: &RfParams, sign_targets: bool) -> Result<Forest> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::Model("random forest: empty training set".into()));
    }
    let d = check_training_set(train, 1)?;
    let xs: Vec<Vec<f64>> = train.iter().map(|i| i.x.clone()).collect();
    let ys: Vec<f64> = train.iter().map(|i| i.y).collect();
    let n = train.len();
    let mtry = hp.max_features.resolve(d, sign_targets);

    let mut master = ChaCha8Rng::seed_from_u64(hp.seed);
    let seeds: Vec<u64> = (0..hp.n_trees).map(|_| master.random()).collect();
    let grown: Vec<(Tree, Vec<bool>)> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut idx: Vec<usize> = if hp.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut in_bag = vec![false; n];
            for &i in &idx {
                in_bag[i] = true;
            }
            let mut b = Builder {
                xs: &xs,
                ys: &ys,
                mtry,
                min_leaf: hp.min_leaf,
                nodes: Vec::new(),
            };
            b.grow(&mut idx, &mut rng);
            (Tree { nodes: b.nodes }, in_bag)
        })
        .collect();

    let oob = (0..n)
        .map(|i| {
            let preds: Vec<f64> = grown
                .iter()
                .filter(|(_, bag)| !bag[i])
                .map(|(t, _)| t.predict(&xs[i]))
                .collect();
            (!preds.is_empty()).then(|| preds.iter().sum::<f64>() / preds.len() as f64)
        })
        .collect();
    Ok(Forest {
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        n_features: d,
        oob,
    })
}
