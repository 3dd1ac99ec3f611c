//! CART classification trees: Gini splitting on presorted columns and
//! cost-complexity pruning.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    pub min_split: usize,
    pub min_bucket: usize,
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSplit {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Training class counts reaching this node.
    pub counts: Vec<u32>,
    pub depth: usize,
    pub split: Option<TreeSplit>,
}

impl TreeNode {
    fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Resubstitution misclassification count.
    fn risk(&self) -> f64 {
        (self.n() - self.counts.iter().copied().max().unwrap_or(0)) as f64
    }
}

/// A fitted tree. Node 0 is the root; rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    n_features: usize,
    n_classes: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.split.is_none())
            .map(|n| n.depth)
            .max()
            .unwrap_or(0)
    }

    pub fn root_risk(&self) -> f64 {
        self.nodes[0].risk()
    }

    pub fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            node = if x[s.feature] <= s.threshold {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node
    }

    /// Laplace-smoothed class frequencies of the leaf reached by `x`.
    pub fn proba_into(&self, x: &[f64], out: &mut [f64]) {
        let leaf = self.leaf_for(x);
        let denom = (leaf.n() as usize + self.n_classes) as f64;
        for (o, &c) in out.iter_mut().zip(&leaf.counts) {
            *o = (c as f64 + 1.0) / denom;
        }
    }

    /// Majority class of the leaf reached by `x` (ties to the lowest index).
    pub fn predict_class(&self, x: &[f64]) -> usize {
        majority(&self.leaf_for(x).counts)
    }

    /// The minimal cost-complexity subtree for penalty `alpha` per leaf: a node is
    /// collapsed whenever `R(t) + alpha <= cost(best pruned subtree of t)`.
    pub fn prune(&self, alpha: f64) -> Tree {
        let mut collapse = alloc::vec![false; self.nodes.len()];
        self.prune_cost(0, alpha, &mut collapse);
        let mut nodes = Vec::new();
        self.copy_pruned(0, &collapse, &mut nodes);
        Tree {
            nodes,
            n_features: self.n_features,
            n_classes: self.n_classes,
        }
    }

    fn prune_cost(&self, id: usize, alpha: f64, collapse: &mut [bool]) -> f64 {
        let node = &self.nodes[id];
        let leaf_cost = node.risk() + alpha;
        match &node.split {
            None => leaf_cost,
            Some(s) => {
                let sub = self.prune_cost(s.left, alpha, collapse)
                    + self.prune_cost(s.right, alpha, collapse);
                if leaf_cost <= sub + 1e-9 {
                    collapse[id] = true;
                    leaf_cost
                } else {
                    sub
                }
            }
        }
    }

    fn copy_pruned(&self, id: usize, collapse: &[bool], out: &mut Vec<TreeNode>) -> usize {
        let node = &self.nodes[id];
        let new_id = out.len();
        out.push(TreeNode {
            counts: node.counts.clone(),
            depth: node.depth,
            split: None,
        });
        if let (Some(s), false) = (&node.split, collapse[id]) {
            let left = self.copy_pruned(s.left, collapse, out);
            let right = self.copy_pruned(s.right, collapse, out);
            out[new_id].split = Some(TreeSplit {
                feature: s.feature,
                threshold: s.threshold,
                left,
                right,
            });
        }
        new_id
    }
}

pub(crate) fn majority(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Candidate {
    feature: usize,
    position: usize,
    threshold: f64,
    impurity: f64,
}

/// Grows an unpruned tree with Gini impurity.
///
/// Equal-impurity candidates resolve to the lower column, then the lower threshold.
pub fn grow(x: &Matrix, y: &[usize], n_classes: usize, params: &GrowParams) -> Tree {
    let n = x.rows();
    let d = x.cols();
    assert_eq!(n, y.len());
    assert!(n > 0, "cannot grow a tree on zero rows");

    // one presorted copy of the row ids per feature; each node owns the same
    // [start, end) range in all of them
    let mut order: Vec<Vec<u32>> = (0..d)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x.get(a as usize, f)
                    .total_cmp(&x.get(b as usize, f))
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();
    let mut goes_left = alloc::vec![false; n];
    let mut scratch: Vec<u32> = Vec::with_capacity(n);

    let root_counts = class_counts(y, n_classes, (0..n as u32).collect::<Vec<_>>().iter());
    let mut nodes = alloc::vec![TreeNode {
        counts: root_counts,
        depth: 0,
        split: None
    }];
    let mut stack = alloc::vec![(0usize, 0usize, n)];

    while let Some((id, start, end)) = stack.pop() {
        let size = end - start;
        let depth = nodes[id].depth;
        let counts = &nodes[id].counts;
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure
            || size < params.min_split
            || depth >= params.max_depth
            || size < 2 * params.min_bucket.max(1)
        {
            continue;
        }
        let sumsq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let parent_impurity = size as f64 - sumsq / size as f64;
        let Some(best) = best_split(x, y, &order, start, end, counts, params.min_bucket.max(1))
        else {
            continue;
        };
        if parent_impurity - best.impurity <= 1e-9 * size as f64 {
            continue;
        }

        let seg = &order[best.feature][start..end];
        for (k, &r) in seg.iter().enumerate() {
            goes_left[r as usize] = k <= best.position;
        }
        let n_left = best.position + 1;
        for col in order.iter_mut() {
            let seg = &mut col[start..end];
            scratch.clear();
            scratch.extend(seg.iter().copied().filter(|&r| goes_left[r as usize]));
            scratch.extend(seg.iter().copied().filter(|&r| !goes_left[r as usize]));
            seg.copy_from_slice(&scratch);
        }
        let left_counts = class_counts(y, n_classes, order[0][start..start + n_left].iter());
        let right_counts = class_counts(y, n_classes, order[0][start + n_left..end].iter());
        let left = nodes.len();
        nodes.push(TreeNode {
            counts: left_counts,
            depth: depth + 1,
            split: None,
        });
        let right = nodes.len();
        nodes.push(TreeNode {
            counts: right_counts,
            depth: depth + 1,
            split: None,
        });
        nodes[id].split = Some(TreeSplit {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        });
        stack.push((right, start + n_left, end));
        stack.push((left, start, start + n_left));
    }

    Tree {
        nodes,
        n_features: d,
        n_classes,
    }
}

fn class_counts<'a>(
    y: &[usize],
    n_classes: usize,
    rows: impl Iterator<Item = &'a u32>,
) -> Vec<u32> {
    let mut c = alloc::vec![0u32; n_classes];
    for &r in rows {
        c[y[r as usize]] += 1;
    }
    c
}

fn best_split(
    x: &Matrix,
    y: &[usize],
    order: &[Vec<u32>],
    start: usize,
    end: usize,
    counts: &[u32],
    min_bucket: usize,
) -> Option<Candidate> {
    let size = end - start;
    let total_sumsq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    let tol = 1e-9 * size as f64;
    let mut best: Option<Candidate> = None;
    let mut left = alloc::vec![0u32; counts.len()];
    for (f, col) in order.iter().enumerate() {
        let seg = &col[start..end];
        left.iter_mut().for_each(|c| *c = 0);
        let mut ss_left = 0.0;
        let mut ss_right = total_sumsq;
        for k in 0..size - 1 {
            let r = seg[k] as usize;
            let cls = y[r];
            let cl = left[cls] as f64;
            let cr = (counts[cls] - left[cls]) as f64;
            ss_left += 2.0 * cl + 1.0;
            ss_right -= 2.0 * cr - 1.0;
            left[cls] += 1;
            let n_left = k + 1;
            let n_right = size - n_left;
            if n_left < min_bucket {
                continue;
            }
            if n_right < min_bucket {
                break;
            }
            let v = x.get(r, f);
            let v_next = x.get(seg[k + 1] as usize, f);
            if v_next <= v {
                continue;
            }
            let impurity = (n_left as f64 - ss_left / n_left as f64)
                + (n_right as f64 - ss_right / n_right as f64);
            if best.as_ref().map_or(true, |b| impurity < b.impurity - tol) {
                let mid = 0.5 * (v + v_next);
                let threshold = if mid < v_next { mid } else { v };
                best = Some(Candidate {
                    feature: f,
                    position: k,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}
