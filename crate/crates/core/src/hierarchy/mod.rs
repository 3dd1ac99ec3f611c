//! Rooted binary dendrograms over classes.

mod best_of;
mod cluster;
mod newick;
mod random;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use best_of::{best_of_candidates, best_of_n, BestOf};
pub use cluster::{hac_build, hkm_build, hkm_build_with, two_means, HkmParams};
pub use newick::{from_newick, to_newick};
pub use random::sample_random_hierarchy;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Leaf { class: usize },
    Internal { left: NodeId, right: NodeId },
}

/// A rooted binary tree whose leaves are the classes `0..n`, each exactly once.
/// Nodes live in an arena; ids are indices into it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hierarchy {
    nodes: Vec<Node>,
    root: NodeId,
    n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub max_depth: usize,
    pub mean_leaf_depth: f64,
}

/// Incremental construction: create leaves, join pairs, then [`finish`](Self::finish).
#[derive(Debug, Default)]
pub struct HierarchyBuilder {
    nodes: Vec<Node>,
}

impl HierarchyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, class: usize) -> NodeId {
        self.nodes.push(Node::Leaf { class });
        self.nodes.len() - 1
    }

    pub fn join(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.nodes.push(Node::Internal { left, right });
        self.nodes.len() - 1
    }

    pub fn finish(self, root: NodeId) -> Result<Hierarchy> {
        Hierarchy::from_parts(self.nodes, root)
    }
}

impl Hierarchy {
    /// Validates the tree reachable from `root`: every class `0..n` appears at
    /// exactly one leaf, `n >= 2`, and every arena node is reached exactly once.
    pub fn from_parts(nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidHierarchy(m));
        if root >= nodes.len() {
            return bad(format!("root {} out of range", root));
        }
        let mut visited = alloc::vec![false; nodes.len()];
        let mut classes = Vec::new();
        let mut stack = alloc::vec![root];
        while let Some(id) = stack.pop() {
            if id >= nodes.len() {
                return bad(format!("child {} out of range", id));
            }
            if visited[id] {
                return bad(format!("node {} reached twice", id));
            }
            visited[id] = true;
            match nodes[id] {
                Node::Leaf { class } => classes.push(class),
                Node::Internal { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        if visited.iter().any(|v| !v) {
            return bad("unreachable nodes in arena".into());
        }
        let n = classes.len();
        if n < 2 {
            return bad("a hierarchy needs at least two classes".into());
        }
        let set: BTreeSet<usize> = classes.iter().copied().collect();
        if set.len() != n || set.iter().next_back() != Some(&(n - 1)) {
            return bad(format!(
                "leaves {:?} are not a permutation of 0..{}",
                classes, n
            ));
        }
        Ok(Self {
            nodes,
            root,
            n_classes: n,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.nodes[id] {
            Node::Internal { left, right } => Some((left, right)),
            Node::Leaf { .. } => None,
        }
    }

    /// Internal node ids in preorder (root first).
    pub fn internal_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.n_classes - 1);
        let mut stack = alloc::vec![self.root];
        while let Some(id) = stack.pop() {
            if let Node::Internal { left, right } = self.nodes[id] {
                out.push(id);
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    /// Classes under `id`, ascending.
    pub fn classes_under(&self, id: NodeId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![id];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { class } => out.push(class),
                Node::Internal { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Depth of every class's leaf (root at depth 0), indexed by class.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut depths = alloc::vec![0; self.n_classes];
        let mut stack = alloc::vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { class } => depths[class] = d,
                Node::Internal { left, right } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        depths
    }

    pub fn depth_stats(&self) -> DepthStats {
        let d = self.leaf_depths();
        DepthStats {
            max_depth: d.iter().copied().max().unwrap_or(0),
            mean_leaf_depth: d.iter().sum::<usize>() as f64 / d.len() as f64,
        }
    }

    /// Order-independent description of the topology: children are sorted, so two
    /// hierarchies share a canonical form iff they are the same unordered tree.
    pub fn canonical_form(&self) -> String {
        self.canonical(self.root).1
    }

    fn canonical(&self, id: NodeId) -> (usize, String) {
        match self.nodes[id] {
            Node::Leaf { class } => (class, format!("{}", class)),
            Node::Internal { left, right } => {
                let a = self.canonical(left);
                let b = self.canonical(right);
                let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
                (a.0, format!("({},{})", a.1, b.1))
            }
        }
    }

    fn ordered_eq(&self, a: NodeId, other: &Hierarchy, b: NodeId) -> bool {
        match (self.nodes[a], other.nodes[b]) {
            (Node::Leaf { class: x }, Node::Leaf { class: y }) => x == y,
            (
                Node::Internal {
                    left: l1,
                    right: r1,
                },
                Node::Internal {
                    left: l2,
                    right: r2,
                },
            ) => self.ordered_eq(l1, other, l2) && self.ordered_eq(r1, other, r2),
            _ => false,
        }
    }
}

/// Structural equality: same tree with the same child order, whatever the arena
/// layout.
impl PartialEq for Hierarchy {
    fn eq(&self, other: &Self) -> bool {
        self.n_classes == other.n_classes && self.ordered_eq(self.root, other, other.root)
    }
}

/// `(2n - 3)!!`, the number of rooted binary leaf-labelled topologies on `n` leaves.
pub fn count_hierarchies(n: usize) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {}", n)));
    }
    Ok((1..=2 * n - 3)
        .step_by(2)
        .fold(BigUint::from(1u32), |acc, k| acc * BigUint::from(k)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::string::ToString;

    /// (((0,1),2),3)...: a left comb over `n` classes.
    pub(crate) fn chain(n: usize) -> Hierarchy {
        let mut b = HierarchyBuilder::new();
        let mut acc = b.leaf(0);
        for c in 1..n {
            let l = b.leaf(c);
            acc = b.join(acc, l);
        }
        b.finish(acc).unwrap()
    }

    pub(crate) fn balanced(n: usize) -> Hierarchy {
        fn rec(b: &mut HierarchyBuilder, lo: usize, hi: usize) -> NodeId {
            if hi - lo == 1 {
                return b.leaf(lo);
            }
            let mid = (lo + hi) / 2;
            let l = rec(b, lo, mid);
            let r = rec(b, mid, hi);
            b.join(l, r)
        }
        let mut b = HierarchyBuilder::new();
        let root = rec(&mut b, 0, n);
        b.finish(root).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(count_hierarchies(2).unwrap(), BigUint::from(1u32));
        assert_eq!(count_hierarchies(3).unwrap(), BigUint::from(3u32));
        assert_eq!(count_hierarchies(4).unwrap(), BigUint::from(15u32));
        assert_eq!(count_hierarchies(100).unwrap().to_string().len(), 185);
        assert!(count_hierarchies(1).is_err());
    }

    #[test]
    fn depth_examples() {
        let b = balanced(4).depth_stats();
        assert_eq!((b.max_depth, b.mean_leaf_depth), (2, 2.0));
        let c = chain(4).depth_stats();
        assert_eq!((c.max_depth, c.mean_leaf_depth), (3, 2.25));
        assert_eq!(chain(9).depth_stats().max_depth, 8);
    }

    #[test]
    fn invariants_are_checked() {
        let nodes = alloc::vec![
            Node::Leaf { class: 0 },
            Node::Leaf { class: 0 },
            Node::Internal { left: 0, right: 1 }
        ];
        assert!(Hierarchy::from_parts(nodes, 2).is_err());
        let nodes = alloc::vec![
            Node::Leaf { class: 0 },
            Node::Leaf { class: 2 },
            Node::Internal { left: 0, right: 1 }
        ];
        assert!(Hierarchy::from_parts(nodes, 2).is_err());
        let nodes = alloc::vec![Node::Leaf { class: 0 }];
        assert!(Hierarchy::from_parts(nodes, 0).is_err());
        let h = chain(5);
        assert_eq!(h.internal_nodes().len(), 4);
        assert_eq!(h.classes_under(h.root()), alloc::vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn canonical_form_ignores_child_order() {
        let mut b = HierarchyBuilder::new();
        let (x, y, z) = (b.leaf(2), b.leaf(0), b.leaf(1));
        let j = b.join(x, y);
        let r = b.join(z, j);
        let h = b.finish(r).unwrap();
        assert_eq!(h.canonical_form(), "((0,2),1)");
        assert_ne!(h, chain(3));
    }
}
