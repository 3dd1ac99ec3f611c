//! Fixtures shared by the integration tests.

use std::path::Path;

use hmc_bench::csvio::{write_dataset_csv, LabelColumn};
use hmc_bench::store::{Metadata, Record};
use hmc_bench::synth::gaussian_classes;
use hmc_bench::{DatasetConfig, ExperimentConfig, HierarchySource, MethodConfig, ResultStore};
use hmc_core::{CbdPlan, CbdScheme, CbdVariant, ClassifierSpec, SplitPlan};

/// Five Gaussian classes on a line, written to `dir/blobs.csv`.
pub fn blobs_csv(dir: &Path) -> std::path::PathBuf {
    let centres: Vec<Vec<f64>> = [0.0, 1.5, 3.0, 8.0, 9.5]
        .iter()
        .map(|&x| vec![x, 0.5 * x])
        .collect();
    let ds = gaussian_classes("blobs", &centres, 25, 0.6, 11);
    let path = dir.join("blobs.csv");
    write_dataset_csv(&ds, &path).unwrap();
    path
}

/// Every hierarchy source on the blobs, four folds.
pub fn small_config(dir: &Path) -> ExperimentConfig {
    let path = blobs_csv(dir);
    let cart = ClassifierSpec::cart().with_cp_grid(vec![0.1, 0.01]);
    let logistic = ClassifierSpec::logistic();
    let mut cbd = MethodConfig::new("cbd", HierarchySource::Cbd, logistic.clone());
    let mut plan = CbdPlan::new(logistic.clone(), CbdScheme::Ova, CbdVariant::AvaProxy);
    plan.mc_folds = 2;
    cbd.cbd = Some(plan);
    let mut best = MethodConfig::new("best_of", HierarchySource::BestOf, cart.clone());
    best.n_candidates = 3;
    let mut fixed = MethodConfig::new("fixed", HierarchySource::FixedNewick, cart.clone());
    fixed.newick = Some("(((c0,c1),c2),(c3,c4));".into());
    ExperimentConfig {
        name: "small".into(),
        datasets: vec![DatasetConfig {
            path,
            label_column: LabelColumn::Name("label".into()),
            header: true,
            name: None,
            standardize: true,
        }],
        split: SplitPlan {
            seed: 3,
            n_folds: 4,
            train_fraction: 0.9,
        },
        methods: vec![
            MethodConfig::new("single", HierarchySource::SingleBaseline, cart.clone()),
            MethodConfig::new("ova", HierarchySource::OvaBaseline, cart.clone()),
            MethodConfig::new("random", HierarchySource::Random, cart.clone()),
            MethodConfig::new("rbd", HierarchySource::Rbd, logistic),
            cbd,
            best,
            fixed,
        ],
        sweep: None,
        output_dir: dir.join("out"),
    }
}

pub fn meta(ratio: f64) -> Metadata {
    Metadata {
        experiment: "constructed".into(),
        config_hash: String::new(),
        split: SplitPlan {
            seed: 0,
            n_folds: 20,
            train_fraction: 0.9,
        },
        test_train_ratio: ratio,
        datasets: Vec::new(),
        version: "test".into(),
    }
}

pub fn record(dataset: &str, method: &str, fold: usize, accuracy: f64, n_classes: usize) -> Record {
    Record {
        dataset: dataset.into(),
        method: method.into(),
        fold,
        accuracy,
        mean_evaluations: 1.0,
        wall_time_s: 0.0,
        n_classes,
        n_train: 90,
        n_test: 10,
        max_depth: None,
        mean_leaf_depth: None,
        hierarchy: String::new(),
        method_hash: "h".into(),
    }
}

/// A store holding `(dataset, method) -> per-fold accuracies`.
pub fn constructed(dir: &Path, groups: &[(&str, &str, usize, Vec<f64>)]) -> ResultStore {
    let mut s = ResultStore::open_or_create(dir, meta(1.0 / 9.0)).unwrap();
    for (ds, m, n, accs) in groups {
        for (f, &a) in accs.iter().enumerate() {
            s.append(record(ds, m, f, a, *n)).unwrap();
        }
    }
    s
}
