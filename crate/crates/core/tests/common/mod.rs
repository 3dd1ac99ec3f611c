//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hmc_core::hierarchy::{Hierarchy, Node};
use hmc_core::{ConfusionMatrix, DissimilarityMatrix, Matrix};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// An unordered topology: the class set of every internal node.
pub type Topo = BTreeSet<BTreeSet<usize>>;

pub fn clusters_of(h: &Hierarchy) -> Topo {
    h.internal_nodes()
        .into_iter()
        .map(|id| h.classes_under(id).into_iter().collect())
        .collect()
}

#[derive(Clone)]
enum Tree {
    Leaf(usize),
    Join(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn size(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Join(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Every tree obtained by attaching `leaf` above one of the nodes.
    fn insertions(&self, leaf: usize) -> Vec<Tree> {
        let mut out = vec![Tree::Join(
            Box::new(self.clone()),
            Box::new(Tree::Leaf(leaf)),
        )];
        if let Tree::Join(a, b) = self {
            for a2 in a.insertions(leaf) {
                out.push(Tree::Join(Box::new(a2), b.clone()));
            }
            for b2 in b.insertions(leaf) {
                out.push(Tree::Join(a.clone(), Box::new(b2)));
            }
        }
        out
    }

    fn clusters(&self, out: &mut Topo) -> BTreeSet<usize> {
        match self {
            Tree::Leaf(c) => BTreeSet::from([*c]),
            Tree::Join(a, b) => {
                let mut s = a.clusters(out);
                s.extend(b.clusters(out));
                out.insert(s.clone());
                s
            }
        }
    }
}

/// All rooted binary topologies on `n` labelled leaves.
pub fn enumerate_topologies(n: usize) -> Vec<Topo> {
    let mut trees = vec![Tree::Join(Box::new(Tree::Leaf(0)), Box::new(Tree::Leaf(1)))];
    for leaf in 2..n {
        trees = trees.iter().flat_map(|t| t.insertions(leaf)).collect();
    }
    debug_assert!(trees.iter().all(|t| t.size() == 2 * n - 1));
    trees
        .iter()
        .map(|t| {
            let mut s = Topo::new();
            t.clusters(&mut s);
            s
        })
        .collect()
}

fn link(d: &[Vec<f64>], a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let total: f64 = a
        .iter()
        .flat_map(|&i| b.iter().map(move |&j| d[i][j]))
        .sum();
    total / (a.len() * b.len()) as f64
}

/// Replays greedy average linkage and checks that every merge forms a cluster of
/// `topo`.
pub fn greedy_accepts(d: &[Vec<f64>], topo: &Topo) -> bool {
    let mut active: Vec<BTreeSet<usize>> = (0..d.len()).map(|c| BTreeSet::from([c])).collect();
    while active.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let v = link(d, &active[i], &active[j]);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let b = active.remove(best.2);
        active[best.1].extend(b);
        if !topo.contains(&active[best.1]) {
            return false;
        }
    }
    true
}

/// The unique enumerated topology consistent with greedy average linkage.
pub fn oracle_hac(d: &[Vec<f64>]) -> Topo {
    let accepted: Vec<Topo> = enumerate_topologies(d.len())
        .into_iter()
        .filter(|t| greedy_accepts(d, t))
        .collect();
    assert_eq!(
        accepted.len(),
        1,
        "greedy merge order should single out one topology"
    );
    accepted.into_iter().next().unwrap()
}

pub fn random_symmetric(n: usize, mut next: impl FnMut() -> f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = next();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

pub fn to_matrix(d: &[Vec<f64>]) -> DissimilarityMatrix {
    DissimilarityMatrix::new(d.len(), d.concat(), "test").unwrap()
}

/// Separability on the 2x2 sub-block of the confusion matrix.
pub fn eq2(m: &ConfusionMatrix, j: usize, k: usize) -> Option<f64> {
    let (a, b, c, e) = (m.get(j, j), m.get(k, k), m.get(j, k), m.get(k, j));
    (a + b + c + e > 0).then(|| (a + b) as f64 / (a + b + c + e) as f64)
}

/// Pairwise-argmax accuracy over rows labelled `j` or `k`.
pub fn eq4(p: &Matrix, truth: &[usize], j: usize, k: usize) -> Option<f64> {
    let (lo, hi) = (j.min(k), j.max(k));
    let rows: Vec<usize> = (0..truth.len())
        .filter(|&i| truth[i] == lo || truth[i] == hi)
        .collect();
    let right = rows
        .iter()
        .filter(|&&i| {
            let guess = if p.get(i, hi) > p.get(i, lo) { hi } else { lo };
            guess == truth[i]
        })
        .count();
    (!rows.is_empty()).then(|| right as f64 / rows.len() as f64)
}

/// Student-t CDF by composite Simpson integration of the density from 0.
pub fn t_cdf_quadrature(x: f64, df: f64) -> f64 {
    let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let f = |t: f64| (ln_c - (df + 1.0) / 2.0 * (t * t / df).ln_1p()).exp();
    let a = x.abs();
    let n = 20_000;
    let h = a / n as f64;
    let mut s = f(0.0) + f(a);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half = s * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Pearson chi-square test of observed category counts against a uniform
/// distribution over `categories`; returns the p-value.
pub fn chi_square_uniform_p(counts: &BTreeMap<String, usize>, categories: usize) -> f64 {
    let total: usize = counts.values().sum();
    let expected = total as f64 / categories as f64;
    let missing = categories - counts.len();
    let stat: f64 = counts
        .values()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum::<f64>()
        + missing as f64 * expected;
    ChiSquared::new((categories - 1) as f64).unwrap().sf(stat)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Canonical string of a hierarchy's unordered topology, for counting.
pub fn topo_key(h: &Hierarchy) -> String {
    h.canonical_form()
}

/// Depth of each class's leaf, computed by walking from the root.
pub fn leaf_depths(h: &Hierarchy) -> Vec<usize> {
    let mut out = vec![0; h.n_classes()];
    let mut stack = vec![(h.root(), 0)];
    while let Some((id, d)) = stack.pop() {
        match h.node(id) {
            Node::Leaf { class } => out[class] = d,
            Node::Internal { left, right } => {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
    }
    out
}
