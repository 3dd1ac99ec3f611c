use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{Hierarchy, Node, NodeId};
use crate::error::{Error, Result};

/// Uniform sample over all `(2n - 3)!!` topologies by sequential leaf insertion.
///
/// Class `k` (for `k >= 2`) is spliced above one of the `2k - 1` existing nodes,
/// chosen uniformly: each of the `2k - 2` edges or a new root. Every topology has
/// exactly one insertion history, and each history has probability
/// `1 / (3 * 5 * ... * (2n - 3))`. The new leaf's side is a fair coin.
pub fn sample_random_hierarchy<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Hierarchy> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {}", n)));
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(2 * n - 1);
    let mut parent: Vec<Option<NodeId>> = Vec::with_capacity(2 * n - 1);
    let add = |nodes: &mut Vec<Node>, parent: &mut Vec<Option<NodeId>>, node| {
        nodes.push(node);
        parent.push(None);
        nodes.len() - 1
    };

    let a = add(&mut nodes, &mut parent, Node::Leaf { class: 0 });
    let b = add(&mut nodes, &mut parent, Node::Leaf { class: 1 });
    let (l, r) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    let mut root = add(
        &mut nodes,
        &mut parent,
        Node::Internal { left: l, right: r },
    );
    parent[a] = Some(root);
    parent[b] = Some(root);

    for class in 2..n {
        let target = rng.random_range(0..nodes.len());
        let leaf = add(&mut nodes, &mut parent, Node::Leaf { class });
        let (l, r) = if rng.random_bool(0.5) {
            (target, leaf)
        } else {
            (leaf, target)
        };
        let joint = add(
            &mut nodes,
            &mut parent,
            Node::Internal { left: l, right: r },
        );
        match parent[target] {
            None => root = joint,
            Some(p) => {
                if let Node::Internal { left, right } = &mut nodes[p] {
                    if *left == target {
                        *left = joint;
                    } else {
                        *right = joint;
                    }
                }
                parent[joint] = Some(p);
            }
        }
        parent[target] = Some(joint);
        parent[leaf] = Some(joint);
    }
    Hierarchy::from_parts(nodes, root)
}
