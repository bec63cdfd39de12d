//! Bagged regression trees with random feature subsets per split.
//!
//! Each tree sees a bootstrap sample of the rows. At every node `mtry`
//! features are drawn without replacement and the split with the largest
//! reduction in squared error is taken, with thresholds at midpoints between
//! consecutive distinct values and both children holding at least `min_leaf`
//! rows. Ties go to the lower feature index, then the lower threshold.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ForestParams;
use crate::linalg::Matrix;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Leaf {
        value: T,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    nodes: Vec<TreeNode<T>>,
    bootstrap: Vec<usize>,
}

impl<T: Real> Tree<T> {
    /// Nodes in creation order; index 0 is the root.
    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    /// Row indices of the bootstrap sample the tree was grown on.
    pub fn bootstrap(&self) -> &[usize] {
        &self.bootstrap
    }

    pub fn predict_row(&self, x: &[T]) -> T {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    k = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<T> {
    trees: Vec<Tree<T>>,
}

impl<T: Real> Forest<T> {
    pub fn trees(&self) -> &[Tree<T>] {
        &self.trees
    }

    pub fn predict_row(&self, x: &[T]) -> T {
        let sum: T = self.trees.iter().map(|t| t.predict_row(x)).sum();
        sum / T::from_usize_lossy(self.trees.len())
    }
}

pub(crate) fn grow<T: Real>(params: &ForestParams, x: &Matrix<T>, y: &[T], seed: u64) -> Forest<T> {
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            grow_tree(params, x, y, &mut rng)
        })
        .collect();
    Forest { trees }
}

struct Best<T> {
    gain: T,
    feature: usize,
    threshold: T,
}

fn grow_tree<T: Real>(
    params: &ForestParams,
    x: &Matrix<T>,
    y: &[T],
    rng: &mut ChaCha8Rng,
) -> Tree<T> {
    let n = y.len();
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut nodes = Vec::new();
    // Work stack of (node slot, rows reaching it).
    let mut stack = vec![(0usize, bootstrap.clone())];
    nodes.push(TreeNode::Leaf { value: T::zero() });
    let mtry = params.mtry.min(x.cols());
    while let Some((slot, rows)) = stack.pop() {
        let value = rows.iter().map(|&i| y[i]).sum::<T>() / T::from_usize_lossy(rows.len());
        let best = if rows.len() >= 2 * params.min_leaf {
            let mut features: Vec<usize> = sample(rng, x.cols(), mtry).into_vec();
            features.sort_unstable();
            best_split(x, y, &rows, &features, params.min_leaf)
        } else {
            None
        };
        match best {
            Some(b) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&i| x[(i, b.feature)] <= b.threshold);
                let left = nodes.len();
                nodes.push(TreeNode::Leaf { value: T::zero() });
                nodes.push(TreeNode::Leaf { value: T::zero() });
                nodes[slot] = TreeNode::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left,
                    right: left + 1,
                };
                stack.push((left + 1, r));
                stack.push((left, l));
            }
            None => nodes[slot] = TreeNode::Leaf { value },
        }
    }
    Tree { nodes, bootstrap }
}

fn best_split<T: Real>(
    x: &Matrix<T>,
    y: &[T],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Best<T>> {
    let n = rows.len();
    let total: T = rows.iter().map(|&i| y[i]).sum();
    let nt = T::from_usize_lossy(n);
    let base = total * total / nt;
    let mut best: Option<Best<T>> = None;
    let mut order: Vec<(T, T)> = Vec::with_capacity(n);
    for &f in features {
        order.clear();
        order.extend(rows.iter().map(|&i| (x[(i, f)], y[i])));
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let mut left_sum = T::zero();
        for k in 0..n - 1 {
            left_sum = left_sum + order[k].1;
            let n_left = k + 1;
            if n_left < min_leaf || n - n_left < min_leaf || order[k].0 == order[k + 1].0 {
                continue;
            }
            let nl = T::from_usize_lossy(n_left);
            let right_sum = total - left_sum;
            // SSE reduction equals the between-group sum of squares.
            let gain = left_sum * left_sum / nl + right_sum * right_sum / (nt - nl) - base;
            let threshold = (order[k].0 + order[k + 1].0) * T::lit(0.5);
            let better = match &best {
                None => gain > T::zero(),
                Some(b) => gain > b.gain,
            };
            if better {
                best = Some(Best {
                    gain,
                    feature: f,
                    threshold,
                });
            }
        }
    }
    best
}
