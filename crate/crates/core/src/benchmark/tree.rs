//! CART trees: variance reduction (summed over outputs) for regression, Gini
//! impurity for classification.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmark::matrix::Matrix;
use crate::util::mix64;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Targets<'a> {
    Regression(&'a Matrix),
    Classes { ids: &'a [usize], count: usize },
}

impl Targets<'_> {
    fn width(&self) -> usize {
        match self {
            Targets::Regression(y) => y.cols,
            Targets::Classes { count, .. } => *count,
        }
    }

    /// Per-output sums (regression) or class counts (classification).
    fn accumulate(&self, row: usize, acc: &mut [f64]) {
        match self {
            Targets::Regression(y) => acc.iter_mut().zip(y.row(row)).for_each(|(a, v)| *a += v),
            Targets::Classes { ids, .. } => acc[ids[row]] += 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Output means (regression) or class frequencies (classification).
    Leaf { value: Vec<f64> },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn child_seed(seed: u64, direction: u64) -> u64 {
    mix64(seed ^ mix64(direction))
}

/// `sum_k s_k^2 / n`; a split maximizes the sum of this over both sides.
fn purity(sums: &[f64], n: f64) -> f64 {
    sums.iter().map(|s| s * s).sum::<f64>() / n
}

struct Builder<'a> {
    x: &'a Matrix,
    y: Targets<'a>,
    params: TreeParams,
    nodes: Vec<Node>,
    buf: Vec<(f64, usize)>,
}

impl Builder<'_> {
    fn leaf_value(&self, idx: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.y.width()];
        for &r in idx {
            self.y.accumulate(r, &mut acc);
        }
        let n = idx.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match self.y {
            Targets::Regression(y) => {
                let first = y.row(idx[0]);
                idx.iter().all(|&r| y.row(r) == first)
            }
            Targets::Classes { ids, .. } => idx.iter().all(|&r| ids[r] == ids[idx[0]]),
        }
    }

    fn best_split(&mut self, idx: &[usize], seed: u64) -> Option<(usize, f64, f64)> {
        let d = self.x.cols;
        let width = self.y.width();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = sample(&mut rng, d, self.params.max_features.clamp(1, d)).into_vec();
        features.sort_unstable();

        let mut total = vec![0.0; width];
        for &r in idx {
            self.y.accumulate(r, &mut total);
        }
        let n = idx.len();
        let parent = purity(&total, n as f64);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut left = vec![0.0; width];
        let mut right = vec![0.0; width];
        for f in features {
            self.buf.clear();
            self.buf.extend(idx.iter().map(|&r| (self.x.get(r, f), r)));
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if self.buf[0].0 == self.buf[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n - 1 {
                self.y.accumulate(self.buf[i].1, &mut left);
                let (a, b) = (self.buf[i].0, self.buf[i + 1].0);
                if a == b {
                    continue;
                }
                right.iter_mut().zip(&total).zip(&left).for_each(|((r, t), l)| *r = t - l);
                let nl = (i + 1) as f64;
                let score = purity(&left, nl) + purity(&right, n as f64 - nl);
                if score > parent && best.is_none_or(|(_, _, s)| score > s) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((f, threshold, score));
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, seed: u64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(idx),
        });
        if depth >= self.params.max_depth || idx.len() < 2 || self.is_pure(idx) {
            return id;
        }
        let Some((feature, threshold, _)) = self.best_split(idx, seed) else {
            return id;
        };
        let x = self.x;
        idx.sort_by_key(|&r| x.get(r, feature) > threshold);
        let split = idx.partition_point(|&r| x.get(r, feature) <= threshold);
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, child_seed(seed, 1));
        let right = self.build(r, depth + 1, child_seed(seed, 2));
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl Tree {
    /// Grows a tree on the rows listed in `idx` (repeats allowed). Node
    /// randomness derives from the parent's seed, so limiting the depth only
    /// prunes the tree grown without the limit.
    pub(crate) fn fit(x: &Matrix, y: Targets<'_>, mut idx: Vec<usize>, params: TreeParams, seed: u64) -> Tree {
        let mut b = Builder {
            x,
            y,
            params,
            nodes: Vec::new(),
            buf: Vec::with_capacity(idx.len()),
        };
        if !idx.is_empty() {
            b.build(&mut idx, 0, seed);
        }
        Tree { nodes: b.nodes }
    }

    pub fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
