//! Binary regression tree grown by variance reduction.

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig {
            max_depth: 4,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Root first.
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn sse(sum: f64, sumsq: f64, n: f64) -> f64 {
    (sumsq - sum * sum / n).max(0.0)
}

/// Best split of `rows`: largest SSE reduction, first feature and lowest
/// threshold on ties. Thresholds are midpoints between adjacent distinct
/// values.
fn best_split(x: &[Vec<f64>], y: &[f64], rows: &[usize], min_leaf: usize) -> Option<Best> {
    let n = rows.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let total: f64 = rows.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent = sse(total, total_sq, n as f64);
    let mut best: Option<Best> = None;
    let mut sorted = rows.to_vec();
    for f in 0..x[rows[0]].len() {
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for k in 0..n - 1 {
            let i = sorted[k];
            sum += y[i];
            sumsq += y[i] * y[i];
            let nl = k + 1;
            let (lo, hi) = (x[i][f], x[sorted[k + 1]][f]);
            if nl < min_leaf || n - nl < min_leaf || lo >= hi {
                continue;
            }
            let split = sse(sum, sumsq, nl as f64) + sse(total - sum, total_sq - sumsq, (n - nl) as f64);
            let gain = parent - split;
            if gain > 1e-12 * parent.max(1e-300) && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                best = Some(Best {
                    feature: f,
                    threshold: if mid < hi { mid } else { lo },
                    gain,
                });
            }
        }
    }
    best
}

pub fn fit_cart(x: &[Vec<f64>], y: &[f64], cfg: &CartConfig) -> Result<RegressionTree, ModelError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(ModelError::DegenerateData("need one target per row and at least one row".into()));
    }
    if cfg.min_leaf == 0 {
        return Err(ModelError::InvalidConfig("min_leaf must be at least 1".into()));
    }
    let mut nodes = Vec::new();
    grow(x, y, (0..x.len()).collect(), 0, cfg, &mut nodes);
    Ok(RegressionTree { nodes })
}

fn grow(x: &[Vec<f64>], y: &[f64], rows: Vec<usize>, depth: usize, cfg: &CartConfig, nodes: &mut Vec<TreeNode>) -> usize {
    let id = nodes.len();
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    nodes.push(TreeNode::Leaf {
        value: mean,
        samples: rows.len(),
    });
    if depth >= cfg.max_depth {
        return id;
    }
    let Some(b) = best_split(x, y, &rows, cfg.min_leaf) else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][b.feature] <= b.threshold);
    let left = grow(x, y, l, depth + 1, cfg, nodes);
    let right = grow(x, y, r, depth + 1, cfg, nodes);
    nodes[id] = TreeNode::Split {
        feature: b.feature,
        threshold: b.threshold,
        left,
        right,
    };
    id
}
