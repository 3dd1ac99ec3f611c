mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use hmc_core::hierarchy::{count_hierarchies, hac_build, hkm_build, sample_random_hierarchy};
use hmc_core::rng::rng_from;
use num_bigint::BigUint;
use rand::Rng;

#[test]
fn counts_match_enumeration() {
    for n in 2..=6 {
        let topos = enumerate_topologies(n);
        let distinct: BTreeSet<Topo> = topos.iter().cloned().collect();
        assert_eq!(distinct.len(), topos.len());
        assert_eq!(count_hierarchies(n).unwrap(), BigUint::from(topos.len()));
    }
}

#[test]
fn sampler_is_uniform() {
    let mut rng = rng_from(2024);
    for n in 3..=5 {
        let k = enumerate_topologies(n).len();
        let mut counts = BTreeMap::new();
        for _ in 0..1000 * k {
            let h = sample_random_hierarchy(n, &mut rng).unwrap();
            *counts.entry(topo_key(&h)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), k);
        let p = chi_square_uniform_p(&counts, k);
        assert!(p > 0.001, "n={} p={}", n, p);
    }
}

#[test]
fn hac_matches_greedy_oracle() {
    let mut rng = rng_from(7);
    for trial in 0..100 {
        let n = 2 + trial % 4;
        let d = random_symmetric(n, || rng.random_range(0.01..10.0));
        let h = hac_build(&to_matrix(&d));
        assert_eq!(clusters_of(&h), oracle_hac(&d), "trial {}", trial);
    }
}

#[test]
fn hac_first_merge_survives_monotone_transforms() {
    let mut rng = rng_from(8);
    for _ in 0..50 {
        let n = rng.random_range(3..9);
        let d = random_symmetric(n, || rng.random_range(0.01..10.0));
        let t: Vec<Vec<f64>> = d
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| if v == 0.0 { 0.0 } else { (v * 3.0).exp() + v })
                    .collect()
            })
            .collect();
        let first = |m: &[Vec<f64>]| {
            let h = hac_build(&to_matrix(m));
            clusters_of(&h)
                .into_iter()
                .filter(|c| c.len() == 2)
                .collect::<BTreeSet<_>>()
        };
        // the smallest entry is always merged first
        let (mut bi, mut bj) = (0, 1);
        for i in 0..n {
            for j in i + 1..n {
                if d[i][j] < d[bi][bj] {
                    (bi, bj) = (i, j);
                }
            }
        }
        let pair = BTreeSet::from([bi, bj]);
        assert!(first(&d).contains(&pair));
        assert!(first(&t).contains(&pair));
    }
}

#[test]
fn builders_always_produce_valid_hierarchies() {
    let mut rng = rng_from(9);
    for _ in 0..60 {
        let n = rng.random_range(2..25);
        let d = random_symmetric(n, || rng.random_range(0.0..5.0));
        let m = to_matrix(&d);
        for h in [hac_build(&m), hkm_build(&m, &mut rng)] {
            assert_eq!(h.n_classes(), n);
            assert_eq!(h.internal_nodes().len(), n - 1);
            let depths = leaf_depths(&h);
            assert!(depths.iter().all(|&x| x >= 1));
            let s = h.depth_stats();
            assert_eq!(s.max_depth, *depths.iter().max().unwrap());
            assert!(
                1.0 <= s.mean_leaf_depth
                    && s.mean_leaf_depth <= s.max_depth as f64
                    && s.max_depth <= n - 1
            );
        }
    }
}

#[test]
fn hkm_is_reproducible_from_a_seed() {
    let mut rng = rng_from(10);
    let d = random_symmetric(12, || rng.random_range(0.0..5.0));
    let m = to_matrix(&d);
    assert_eq!(
        hkm_build(&m, &mut rng_from(1)),
        hkm_build(&m, &mut rng_from(1))
    );
}
