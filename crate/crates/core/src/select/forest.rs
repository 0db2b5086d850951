use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::perfmatrix::Mask;
use crate::rng::{derive_seed, rng_from_seed, BenchRng};
use crate::{Error, Result};

/// Smallest training set a forest accepts.
pub const MIN_TRAINING_ROWS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestOptions {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means the ceiling of sqrt(F).
    pub max_features: Option<usize>,
}

impl Default for ForestOptions {
    fn default() -> Self {
        ForestOptions {
            trees: 200,
            max_depth: 12,
            min_leaf: 2,
            max_features: None,
        }
    }
}

/// A node of a regression tree. Samples with `z[feature] <= threshold` go
/// left. Leaves hold one prediction per target column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// Nodes in preorder; the root is node 0 and children follow their parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, z: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if z[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { value } => return value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks the structure against `features` inputs and `targets` outputs.
    pub(crate) fn validate(&self, features: usize, targets: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("tree has no nodes"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= features {
                        return Err(Error::invalid(format!(
                            "split feature {feature} out of range for {features} features"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::invalid("split threshold is not finite"));
                    }
                    for c in [left, right] {
                        if *c <= i || *c >= self.nodes.len() {
                            return Err(Error::invalid(format!("node {i} has invalid child {c}")));
                        }
                    }
                }
                Node::Leaf { value } => {
                    if value.len() != targets {
                        return Err(Error::invalid(format!("leaf has {} values, expected {targets}", value.len())));
                    }
                    if value.iter().any(|v| !v.is_finite()) {
                        return Err(Error::invalid("leaf value is not finite"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Bagged multi-output regression trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Mean squared error of out-of-bag predictions over observed targets.
    pub oob_mse: Option<f64>,
}

impl Forest {
    /// Bootstrap-bagged CART forest on features `z` (t x F) and targets `p`
    /// (t x H). Unobserved targets are left out of every split criterion and
    /// leaf mean; a leaf with no observation of a column inherits its
    /// parent's value.
    pub fn fit(z: &DMatrix<f64>, p: &DMatrix<f64>, mask: &Mask, opts: &ForestOptions, seed: u64) -> Result<Forest> {
        let (t, f) = z.shape();
        if t < MIN_TRAINING_ROWS {
            return Err(Error::invalid(format!(
                "forest needs at least {MIN_TRAINING_ROWS} training rows, got {t}"
            )));
        }
        if f == 0 {
            return Err(Error::invalid("forest needs at least one feature"));
        }
        if p.nrows() != t {
            return Err(Error::LengthMismatch { left: p.nrows(), right: t });
        }
        if mask.shape() != p.shape() {
            return Err(Error::invalid("target mask shape differs from the targets"));
        }
        if p.ncols() == 0 {
            return Err(Error::invalid("forest needs at least one target column"));
        }
        if opts.trees == 0 || opts.min_leaf == 0 {
            return Err(Error::invalid("trees and min_leaf must be positive"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("meta-features must be finite"));
        }
        if (0..t).any(|i| (0..p.ncols()).any(|h| mask.get(i, h) && !p[(i, h)].is_finite())) {
            return Err(Error::invalid("observed targets must be finite"));
        }
        let data = TrainData::new(z, p, mask);
        let max_features = opts.max_features.unwrap_or_else(|| (f as f64).sqrt().ceil() as usize).clamp(1, f);
        let all: Vec<usize> = (0..t).collect();
        let root_value = data.masked_mean(&all, &vec![0.0; data.h]);

        let fitted: Vec<(Tree, Vec<bool>)> = (0..opts.trees)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_from_seed(derive_seed(seed, &["tree", &b.to_string()]));
                let sample: Vec<usize> = (0..t).map(|_| rng.random_range(0..t)).collect();
                let mut in_bag = vec![false; t];
                sample.iter().for_each(|&i| in_bag[i] = true);
                let mut builder = Builder {
                    data: &data,
                    opts,
                    max_features,
                    rng,
                    nodes: Vec::new(),
                };
                builder.grow(sample, 0, &root_value);
                (Tree { nodes: builder.nodes }, in_bag)
            })
            .collect();

        let oob_mse = oob_error(&data, &fitted);
        Ok(Forest {
            trees: fitted.into_iter().map(|(tree, _)| tree).collect(),
            oob_mse,
        })
    }

    /// Mean of the trees' leaf vectors.
    pub fn predict(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.targets()];
        for tree in &self.trees {
            for (o, v) in out.iter_mut().zip(tree.leaf_value(z)) {
                *o += v;
            }
        }
        let k = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= k);
        out
    }

    pub fn targets(&self) -> usize {
        self.trees
            .first()
            .and_then(|t| {
                t.nodes.iter().find_map(|n| match n {
                    Node::Leaf { value } => Some(value.len()),
                    Node::Split { .. } => None,
                })
            })
            .unwrap_or(0)
    }
}

fn oob_error(data: &TrainData, fitted: &[(Tree, Vec<bool>)]) -> Option<f64> {
    let mut sq = 0.0;
    let mut count = 0usize;
    for i in 0..data.t {
        let trees: Vec<&Tree> = fitted.iter().filter(|(_, bag)| !bag[i]).map(|(t, _)| t).collect();
        if trees.is_empty() {
            continue;
        }
        let z = data.row(i);
        for h in 0..data.h {
            if !data.observed(i, h) {
                continue;
            }
            let pred = trees.iter().map(|t| t.leaf_value(z)[h]).sum::<f64>() / trees.len() as f64;
            sq += (pred - data.target(i, h)).powi(2);
            count += 1;
        }
    }
    (count > 0).then(|| sq / count as f64)
}

/// Row-major copies of the training inputs.
struct TrainData {
    t: usize,
    f: usize,
    h: usize,
    z: Vec<f64>,
    p: Vec<f64>,
    observed: Vec<bool>,
}

impl TrainData {
    fn new(z: &DMatrix<f64>, p: &DMatrix<f64>, mask: &Mask) -> Self {
        let (t, f) = z.shape();
        let h = p.ncols();
        TrainData {
            t,
            f,
            h,
            z: (0..t).flat_map(|i| (0..f).map(move |j| z[(i, j)])).collect(),
            p: (0..t).flat_map(|i| (0..h).map(move |j| p[(i, j)])).collect(),
            observed: (0..t).flat_map(|i| (0..h).map(move |j| mask.get(i, j))).collect(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.f..(i + 1) * self.f]
    }

    fn feature(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.f + j]
    }

    fn target(&self, i: usize, h: usize) -> f64 {
        self.p[i * self.h + h]
    }

    fn observed(&self, i: usize, h: usize) -> bool {
        self.observed[i * self.h + h]
    }

    fn masked_mean(&self, rows: &[usize], fallback: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.h];
        let mut cnt = vec![0usize; self.h];
        for &i in rows {
            for h in 0..self.h {
                if self.observed(i, h) {
                    sum[h] += self.target(i, h);
                    cnt[h] += 1;
                }
            }
        }
        (0..self.h)
            .map(|h| if cnt[h] > 0 { sum[h] / cnt[h] as f64 } else { fallback[h] })
            .collect()
    }
}

/// Per-column running sums for masked SSE.
#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sq: Vec<f64>,
    cnt: Vec<usize>,
}

impl Moments {
    fn zeros(h: usize) -> Self {
        Moments {
            sum: vec![0.0; h],
            sq: vec![0.0; h],
            cnt: vec![0; h],
        }
    }

    fn add(&mut self, data: &TrainData, i: usize) {
        for h in 0..data.h {
            if data.observed(i, h) {
                let v = data.target(i, h);
                self.sum[h] += v;
                self.sq[h] += v * v;
                self.cnt[h] += 1;
            }
        }
    }

    fn sse(&self) -> f64 {
        (0..self.sum.len())
            .filter(|&h| self.cnt[h] > 0)
            .map(|h| (self.sq[h] - self.sum[h] * self.sum[h] / self.cnt[h] as f64).max(0.0))
            .sum()
    }

    /// SSE of `self - other`.
    fn sse_minus(&self, other: &Moments) -> f64 {
        (0..self.sum.len())
            .filter_map(|h| {
                let c = self.cnt[h] - other.cnt[h];
                (c > 0).then(|| {
                    let s = self.sum[h] - other.sum[h];
                    (self.sq[h] - other.sq[h] - s * s / c as f64).max(0.0)
                })
            })
            .sum()
    }
}

struct Builder<'a> {
    data: &'a TrainData,
    opts: &'a ForestOptions,
    max_features: usize,
    rng: BenchRng,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize, parent_value: &[f64]) -> usize {
        let id = self.nodes.len();
        let value = self.data.masked_mean(&rows, parent_value);
        self.nodes.push(Node::Leaf { value: value.clone() });
        if depth >= self.opts.max_depth || rows.len() < 2 * self.opts.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&rows) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.data.feature(i, split.feature) <= split.threshold);
        let left = self.grow(left_rows, depth + 1, &value);
        let right = self.grow(right_rows, depth + 1, &value);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        let data = self.data;
        let mut total = Moments::zeros(data.h);
        rows.iter().for_each(|&i| total.add(data, i));
        let parent_sse = total.sse();
        if parent_sse <= 0.0 {
            return None;
        }
        let mut features = index::sample(&mut self.rng, data.f, self.max_features).into_vec();
        features.sort_unstable();
        let min_leaf = self.opts.min_leaf;
        let mut best: Option<SplitChoice> = None;
        let mut order = rows.to_vec();
        for &j in &features {
            order.sort_by(|&a, &b| data.feature(a, j).total_cmp(&data.feature(b, j)).then(a.cmp(&b)));
            let mut left = Moments::zeros(data.h);
            for pos in 0..order.len() - 1 {
                left.add(data, order[pos]);
                let (lo, hi) = (data.feature(order[pos], j), data.feature(order[pos + 1], j));
                let n_left = pos + 1;
                if lo == hi || n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let gain = parent_sse - left.sse() - total.sse_minus(&left);
                if gain > 1e-12 * parent_sse.max(1e-300) && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(SplitChoice {
                        feature: j,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
