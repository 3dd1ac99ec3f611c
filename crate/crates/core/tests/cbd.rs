mod common;

use common::spearman;
use hmc_core::dissimilarity::{
    ava_proxy_dissimilarity, cbd_fold_probas, cbd_matrix, confusion_matrix, confusion_row_matrix,
    confusion_subset_dissimilarity,
};
use hmc_core::learners::{fit, predict};
use hmc_core::rng::{derive_seed, rng_from};
use hmc_core::split::monte_carlo_splits;
use hmc_core::{CbdPlan, CbdScheme, CbdVariant, ClassifierSpec, Dataset, Matrix, SplitPlan};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn gaussian_classes(centers: &[(f64, f64)], per: usize, sd: f64, seed: u64) -> Dataset {
    let mut rng = rng_from(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &(x, y)) in centers.iter().enumerate() {
        for _ in 0..per {
            rows.push([x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
            labels.push(c);
        }
    }
    let names = (0..centers.len()).map(|c| format!("k{}", c)).collect();
    Dataset::new("gauss", Matrix::from_rows(&rows).unwrap(), labels, names).unwrap()
}

const VARIANTS: [CbdVariant; 3] = [
    CbdVariant::AvaProxy,
    CbdVariant::ConfusionSubset,
    CbdVariant::ConfusionRows,
];

#[test]
fn separable_data_is_more_dissimilar_than_swapped_labels() {
    let ds = gaussian_classes(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)], 40, 0.5, 1);
    let mut rng = rng_from(2);
    let mut labels = ds.labels().to_vec();
    for y in labels.iter_mut() {
        if *y < 2 && rng.random_bool(0.5) {
            *y = 1 - *y;
        }
    }
    let swapped = Dataset::new(
        "swapped",
        ds.features().clone(),
        labels,
        ds.class_names().to_vec(),
    )
    .unwrap();
    for v in VARIANTS {
        let plan = CbdPlan::new(ClassifierSpec::cart(), CbdScheme::SingleMulticlass, v);
        let a = cbd_matrix(&ds, &plan, 5).unwrap();
        let b = cbd_matrix(&swapped, &plan, 5).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert!(a.get(j, k) >= b.get(j, k), "{:?} ({},{})", v, j, k);
                }
            }
        }
        assert!(a.get(0, 1) > b.get(0, 1));
    }
}

#[test]
fn matrix_is_the_mean_of_fold_matrices() {
    let ds = gaussian_classes(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)], 30, 1.0, 3);
    for v in VARIANTS {
        let mut plan = CbdPlan::new(ClassifierSpec::cart(), CbdScheme::Ova, v);
        plan.mc_folds = 2;
        let folds = cbd_fold_probas(&ds, &plan, 9).unwrap();
        let per_fold: Vec<Vec<f64>> = folds
            .iter()
            .map(|(p, truth)| {
                let pred: Vec<usize> = (0..p.rows())
                    .map(|i| hmc_core::learners::argmax(p.row(i)))
                    .collect();
                let m = confusion_matrix(truth, &pred, 3).unwrap();
                let rows = confusion_row_matrix(&m).unwrap();
                let mut out = vec![0.0; 9];
                for j in 0..3 {
                    for k in 0..3 {
                        if j != k {
                            out[j * 3 + k] = match v {
                                CbdVariant::AvaProxy => {
                                    ava_proxy_dissimilarity(p, truth, j, k).unwrap()
                                }
                                CbdVariant::ConfusionSubset => {
                                    confusion_subset_dissimilarity(&m, j, k).unwrap()
                                }
                                CbdVariant::ConfusionRows => rows.get(j, k),
                            };
                        }
                    }
                }
                out
            })
            .collect();
        let d = cbd_matrix(&ds, &plan, 9).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let want = (per_fold[0][j * 3 + k] + per_fold[1][j * 3 + k]) / 2.0;
                assert!((d.get(j, k) - want).abs() < 1e-12, "{:?}", v);
            }
        }
    }
    // separable classes give the same perfect matrix in every fold
    let ds = gaussian_classes(&[(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)], 20, 0.5, 4);
    let mut plan = CbdPlan::new(
        ClassifierSpec::cart(),
        CbdScheme::SingleMulticlass,
        CbdVariant::ConfusionSubset,
    );
    plan.mc_folds = 2;
    let d = cbd_matrix(&ds, &plan, 1).unwrap();
    assert!((0..3).all(|j| (0..3).all(|k| d.get(j, k) == if j == k { 0.0 } else { 1.0 })));
}

#[test]
fn ava_proxy_ranks_pairs_like_dedicated_pairwise_models() {
    let centers = [(0.0, 0.0), (1.0, 0.2), (2.6, -0.3), (4.5, 0.5), (7.0, 0.0)];
    let ds = gaussian_classes(&centers, 60, 1.0, 6);
    let spec = ClassifierSpec::cart();
    let plan = CbdPlan::new(
        spec.clone(),
        CbdScheme::SingleMulticlass,
        CbdVariant::AvaProxy,
    );
    let seed = 17;
    let proxy = cbd_matrix(&ds, &plan, seed).unwrap();

    // the same internal splits, with one binary model per class pair
    let splits =
        monte_carlo_splits(&ds, &SplitPlan::new(seed, plan.mc_folds, 0.9).unwrap()).unwrap();
    let mut brute = vec![0.0; 25];
    for s in &splits {
        for j in 0..5 {
            for k in j + 1..5 {
                let pick = |idx: &[usize]| {
                    idx.iter()
                        .copied()
                        .filter(|&i| ds.labels()[i] == j || ds.labels()[i] == k)
                        .collect::<Vec<_>>()
                };
                let (tr, te) = (pick(&s.train), pick(&s.test));
                let y = |idx: &[usize]| {
                    idx.iter()
                        .map(|&i| (ds.labels()[i] == k) as usize)
                        .collect::<Vec<_>>()
                };
                let m = fit(
                    &spec,
                    &ds.features().select_rows(&tr),
                    &y(&tr),
                    2,
                    derive_seed(seed, &[j as u64, k as u64]),
                )
                .unwrap();
                let pred = predict(&m, &ds.features().select_rows(&te)).unwrap();
                let acc = pred.iter().zip(y(&te)).filter(|(a, b)| **a == *b).count() as f64
                    / te.len() as f64;
                brute[j * 5 + k] += acc / splits.len() as f64;
            }
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for j in 0..5 {
        for k in j + 1..5 {
            a.push(proxy.get(j, k));
            b.push(brute[j * 5 + k]);
        }
    }
    let rho = spearman(&a, &b);
    assert!(rho >= 0.8, "spearman {} proxy {:?} brute {:?}", rho, a, b);
}
