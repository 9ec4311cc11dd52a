//! CART regression tree: greedy variance-reduction splitting on midpoints
//! of sorted distinct feature values, mean-predicting leaves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartParams {
    /// Nodes with fewer points become leaves.
    pub min_samples_split: usize,
    pub max_depth: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            min_samples_split: 4,
            max_depth: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CartNode {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<CartNode>,
        right: Box<CartNode>,
    },
}

#[derive(Debug, Clone)]
pub struct CartTree {
    pub root: CartNode,
    pub dimension: usize,
    pub params: CartParams,
}

impl CartTree {
    pub fn leaf_count(&self) -> usize {
        fn walk(node: &CartNode) -> usize {
            match node {
                CartNode::Leaf { .. } => 1,
                CartNode::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }
}

fn mean(ys: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| ys[i]).sum::<f64>() / rows.len() as f64
}

fn sse(ys: &[f64], rows: &[usize]) -> f64 {
    let m = mean(ys, rows);
    rows.iter().map(|&i| (ys[i] - m).powi(2)).sum()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    reduction: f64,
}

fn best_split(xs: &[Vec<f64>], ys: &[f64], rows: &[usize]) -> Option<BestSplit> {
    let parent_sse = sse(ys, rows);
    let dim = xs[rows[0]].len();
    let mut best: Option<BestSplit> = None;
    for feature in 0..dim {
        let mut values: Vec<f64> = rows.iter().map(|&i| xs[i][feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = 0.5 * (pair[0] + pair[1]);
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in rows {
                if xs[i][feature] <= threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let reduction = parent_sse - sse(ys, &left) - sse(ys, &right);
            // strict improvement; ties keep the lowest feature/threshold
            if reduction > best.as_ref().map_or(0.0, |b| b.reduction) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    reduction,
                });
            }
        }
    }
    best
}

fn grow(xs: &[Vec<f64>], ys: &[f64], rows: Vec<usize>, depth: usize, params: &CartParams) -> CartNode {
    let node_mean = mean(ys, &rows);
    let zero_variance = rows.iter().all(|&i| ys[i] == ys[rows[0]]);
    if rows.len() < params.min_samples_split || depth >= params.max_depth || zero_variance {
        return CartNode::Leaf {
            value: node_mean,
            count: rows.len(),
        };
    }
    match best_split(xs, ys, &rows) {
        None => CartNode::Leaf {
            value: node_mean,
            count: rows.len(),
        },
        Some(split) => {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in &rows {
                if xs[i][split.feature] <= split.threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            CartNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(grow(xs, ys, left, depth + 1, params)),
                right: Box::new(grow(xs, ys, right, depth + 1, params)),
            }
        }
    }
}

/// Fit a regression tree on `(config vector, score)` points.
pub fn cart_fit(xs: &[Vec<f64>], ys: &[f64], params: CartParams) -> Result<CartTree> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let dimension = xs[0].len();
    if let Some(bad) = xs.iter().find(|row| row.len() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: bad.len(),
        });
    }
    let rows: Vec<usize> = (0..xs.len()).collect();
    Ok(CartTree {
        root: grow(xs, ys, rows, 0, &params),
        dimension,
        params,
    })
}

/// Route an input down the tree (left iff value <= threshold), returning
/// the leaf mean.
pub fn cart_predict(tree: &CartTree, x: &[f64]) -> Result<f64> {
    if x.len() != tree.dimension {
        return Err(Error::DimensionMismatch {
            expected: tree.dimension,
            got: x.len(),
        });
    }
    let mut node = &tree.root;
    loop {
        match node {
            CartNode::Leaf { value, .. } => return Ok(*value),
            CartNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if x[*feature] <= *threshold { left } else { right };
            }
        }
    }
}
