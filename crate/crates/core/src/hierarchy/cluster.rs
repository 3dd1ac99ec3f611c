use alloc::vec::Vec;

use rand::Rng;

use super::{Hierarchy, HierarchyBuilder, NodeId};
use crate::dissimilarity::DissimilarityMatrix;
use crate::rng::{derive_seed, rng_from};

struct Cluster {
    members: Vec<usize>,
    node: NodeId,
}

/// Unweighted average of `d` over all cross pairs.
pub(crate) fn average_link(d: &DissimilarityMatrix, a: &[usize], b: &[usize]) -> f64 {
    let mut s = 0.0;
    for &i in a {
        for &j in b {
            s += d.get(i, j);
        }
    }
    s / (a.len() * b.len()) as f64
}

/// `a` is smaller than `b` beyond relative rounding noise.
#[inline]
pub(crate) fn clearly_less(a: f64, b: f64) -> bool {
    if b == f64::INFINITY {
        return a < b;
    }
    a < b - 1e-12 * libm::fmax(libm::fabs(a), libm::fabs(b))
}

/// Agglomerative clustering with average link over the original class-pair values.
///
/// Each step merges the pair of clusters with the smallest mean cross
/// dissimilarity; ties go to the pair whose (smaller, larger) minimum member
/// indices are lexicographically smallest. The merged node puts the cluster with
/// the smaller minimum member on the left.
pub fn hac_build(d: &DissimilarityMatrix) -> Hierarchy {
    let n = d.n();
    assert!(n >= 2, "hac_build needs at least two classes");
    let mut b = HierarchyBuilder::new();
    // kept sorted by minimum member
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|c| Cluster {
            members: alloc::vec![c],
            node: b.leaf(c),
        })
        .collect();
    while clusters.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let v = average_link(d, &clusters[i].members, &clusters[j].members);
                if clearly_less(v, best.2) {
                    best = (i, j, v);
                }
            }
        }
        let (i, j, _) = best;
        let right = clusters.remove(j);
        let left = &mut clusters[i];
        left.node = b.join(left.node, right.node);
        left.members.extend(right.members);
        left.members.sort_unstable();
    }
    b.finish(clusters[0].node)
        .expect("agglomeration yields a valid hierarchy")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HkmParams {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for HkmParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
        }
    }
}

/// Top-down hierarchical 2-means. At every node the classes are embedded as
/// their rows of `d` restricted to the node's classes and split by
/// [`two_means`]; the side holding the smallest class index goes left.
pub fn hkm_build<R: Rng + ?Sized>(d: &DissimilarityMatrix, rng: &mut R) -> Hierarchy {
    hkm_build_with(d, HkmParams::default(), rng.next_u64())
}

pub fn hkm_build_with(d: &DissimilarityMatrix, params: HkmParams, seed: u64) -> Hierarchy {
    assert!(d.n() >= 2, "hkm_build needs at least two classes");
    let mut b = HierarchyBuilder::new();
    let root = split_node(d, (0..d.n()).collect(), &params, seed, &mut b);
    b.finish(root)
        .expect("divisive splitting yields a valid hierarchy")
}

fn split_node(
    d: &DissimilarityMatrix,
    classes: Vec<usize>,
    params: &HkmParams,
    seed: u64,
    b: &mut HierarchyBuilder,
) -> NodeId {
    if classes.len() == 1 {
        return b.leaf(classes[0]);
    }
    let points: Vec<Vec<f64>> = classes
        .iter()
        .map(|&i| classes.iter().map(|&j| d.get(i, j)).collect())
        .collect();
    // node streams are keyed by (smallest class, size), unique within one tree
    let mut rng = rng_from(derive_seed(
        seed,
        &[classes[0] as u64, classes.len() as u64],
    ));
    let assign = two_means(&points, params.restarts, params.max_iter, &mut rng);
    let first = assign[0];
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (&c, &a) in classes.iter().zip(&assign) {
        if a == first {
            left.push(c)
        } else {
            right.push(c)
        }
    }
    let l = split_node(d, left, params, seed, b);
    let r = split_node(d, right, params, seed, b);
    b.join(l, r)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(points: &[Vec<f64>], assign: &[usize], k: usize) -> Vec<f64> {
    let dim = points[0].len();
    let mut m = alloc::vec![0.0; dim];
    let mut c = 0usize;
    for (p, &a) in points.iter().zip(assign) {
        if a == k {
            m.iter_mut().zip(p).for_each(|(s, v)| *s += v);
            c += 1;
        }
    }
    if c > 0 {
        m.iter_mut().for_each(|s| *s /= c as f64);
    }
    m
}

/// Moves the point farthest from the occupied side's mean into an empty side.
fn repair(points: &[Vec<f64>], assign: &mut [usize]) {
    for k in 0..2 {
        if assign.iter().all(|&a| a != k) {
            let other = 1 - k;
            let m = mean_of(points, assign, other);
            let mut far = 0;
            let mut far_d = f64::NEG_INFINITY;
            for (i, p) in points.iter().enumerate() {
                let dd = sq_dist(p, &m);
                if dd > far_d {
                    far = i;
                    far_d = dd;
                }
            }
            assign[far] = k;
        }
    }
}

/// Lloyd's 2-means with `restarts` random initializations (two distinct points as
/// seeds). Returns a 0/1 assignment with both sides nonempty; the lowest
/// within-cluster sum of squares wins, ties to the earliest restart.
pub fn two_means<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> Vec<usize> {
    let m = points.len();
    assert!(m >= 2);
    if m == 2 {
        return alloc::vec![0, 1];
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let mut centers = [points[i].clone(), points[j].clone()];
        let mut assign = alloc::vec![usize::MAX; m];
        for _ in 0..max_iter {
            let next: Vec<usize> = points
                .iter()
                .map(|p| (sq_dist(p, &centers[1]) < sq_dist(p, &centers[0])) as usize)
                .collect();
            let mut next = next;
            repair(points, &mut next);
            if next == assign {
                break;
            }
            assign = next;
            centers = [mean_of(points, &assign, 0), mean_of(points, &assign, 1)];
        }
        let obj: f64 = points
            .iter()
            .zip(&assign)
            .map(|(p, &a)| sq_dist(p, &centers[a]))
            .sum();
        if best.as_ref().map_or(true, |(b, _)| clearly_less(obj, *b)) {
            best = Some((obj, assign));
        }
    }
    best.expect("at least one restart").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line_matrix(pos: &[f64]) -> DissimilarityMatrix {
        DissimilarityMatrix::from_fn(pos.len(), "line", |i, j| Ok(libm::fabs(pos[i] - pos[j])))
            .unwrap()
    }

    #[test]
    fn hac_three_class_example() {
        let d = DissimilarityMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0], "t")
            .unwrap();
        let h = hac_build(&d);
        assert_eq!(h.canonical_form(), "((0,1),2)");
        // the root merge happens at average link (2 + 3) / 2
        assert_eq!(average_link(&d, &[0, 1], &[2]), 2.5);
    }

    #[test]
    fn hac_two_classes() {
        let d = DissimilarityMatrix::new(2, vec![0.0, 0.3, 0.3, 0.0], "t").unwrap();
        assert_eq!(hac_build(&d).canonical_form(), "(0,1)");
    }

    #[test]
    fn hac_ties_build_a_left_comb() {
        let n = 6;
        let d = DissimilarityMatrix::from_fn(n, "flat", |_, _| Ok(0.1)).unwrap();
        let h = hac_build(&d);
        assert_eq!(h, crate::hierarchy::tests::chain(n));
        assert_eq!(h, hac_build(&d));
    }

    #[test]
    fn hkm_line_example() {
        let d = line_matrix(&[0.0, 1.0, 10.0, 11.0]);
        let mut rng = rng_from(5);
        let h = hkm_build(&d, &mut rng);
        let (l, r) = h.children(h.root()).unwrap();
        assert_eq!(h.classes_under(l), vec![0, 1]);
        assert_eq!(h.classes_under(r), vec![2, 3]);
    }

    #[test]
    fn hkm_isolates_outlier() {
        let d = line_matrix(&[0.0, 1.0, 50.0]);
        for seed in 0..20 {
            let h = hkm_build(&d, &mut rng_from(seed));
            let (l, r) = h.children(h.root()).unwrap();
            assert_eq!(h.classes_under(l), vec![0, 1]);
            assert_eq!(h.classes_under(r), vec![2]);
        }
        let d = DissimilarityMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0], "t").unwrap();
        assert_eq!(hkm_build(&d, &mut rng_from(0)).canonical_form(), "(0,1)");
    }

    #[test]
    fn two_means_never_leaves_a_side_empty() {
        let pts = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let a = two_means(&pts, 3, 10, &mut rng_from(0));
        assert!(a.contains(&0) && a.contains(&1));
    }
}
