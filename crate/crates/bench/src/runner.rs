//! Experiment orchestration: every (dataset, fold, method) cell is an independent
//! task on a worker pool; finished cells are appended to the [`ResultStore`].

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use hmc_core::dissimilarity::{cbd_matrix, rbd_matrix};
use hmc_core::hierarchy::{
    best_of_n, from_newick, hac_build, hkm_build_with, sample_random_hierarchy, HkmParams,
};
use hmc_core::hmc::train_hmc;
use hmc_core::learners::{fit_ova, fit_single_multiclass, predict};
use hmc_core::rng::{derive_seed, rng_from, tag_hash};
use hmc_core::split::monte_carlo_splits;
use hmc_core::{Dataset, FoldSplit, Hierarchy, Standardizer};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::audit::{Audit, Phase};
use crate::config::{Clustering, DatasetConfig, ExperimentConfig, HierarchySource, MethodConfig};
use crate::csvio::load_csv;
use crate::store::{DatasetMeta, Metadata, Record, ResultStore};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "HMC_WORKERS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// 0 means one worker per available core.
    pub workers: usize,
    pub audit: Option<Arc<Audit>>,
    pub quiet: bool,
}

impl RunOptions {
    pub fn from_env() -> Self {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0);
        Self {
            workers,
            ..Self::default()
        }
    }
}

pub struct LoadedDataset {
    pub config: DatasetConfig,
    pub name: String,
    pub data: Dataset,
    pub splits: Vec<FoldSplit>,
}

pub fn load_datasets(cfg: &ExperimentConfig) -> Result<Vec<LoadedDataset>> {
    cfg.datasets
        .iter()
        .map(|d| {
            let name = cfg.dataset_name(d);
            let data = load_csv(&d.path, &d.label_column, d.header)
                .with_context(|| format!("dataset {}", name))?;
            let splits = monte_carlo_splits(&data, &cfg.split)
                .with_context(|| format!("dataset {}", name))?;
            Ok(LoadedDataset {
                config: d.clone(),
                name,
                data,
                splits,
            })
        })
        .collect()
}

/// Test rows of every (dataset, fold), for leakage checks.
pub fn test_index(datasets: &[LoadedDataset]) -> HashMap<(String, usize), HashSet<usize>> {
    datasets
        .iter()
        .flat_map(|d| {
            d.splits
                .iter()
                .map(move |s| ((d.name.clone(), s.fold), s.test.iter().copied().collect()))
        })
        .collect()
}

pub fn method_hash(m: &MethodConfig) -> String {
    let bytes = serde_json::to_vec(m).expect("method serializes");
    Sha256::digest(&bytes)
        .iter()
        .take(8)
        .map(|b| format!("{:02x}", b))
        .collect()
}

pub fn metadata(cfg: &ExperimentConfig, datasets: &[LoadedDataset]) -> Metadata {
    Metadata {
        experiment: cfg.name.clone(),
        config_hash: cfg.hash(),
        split: cfg.split,
        test_train_ratio: cfg.split.test_train_ratio(),
        datasets: datasets
            .iter()
            .map(|d| DatasetMeta {
                name: d.name.clone(),
                n_rows: d.data.n_rows(),
                n_features: d.data.n_features(),
                class_names: d.data.class_names().to_vec(),
                class_counts: d.data.class_counts(),
            })
            .collect(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

/// Runs every configured method on every dataset and fold, skipping cells already
/// in the store. Failed cells are reported together after the others finish;
/// completed cells stay persisted.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ResultStore> {
    cfg.validate()?;
    let datasets = load_datasets(cfg)?;
    let store = ResultStore::open_or_create(&cfg.output_dir, metadata(cfg, &datasets))?;
    run_methods(cfg, &cfg.methods, &datasets, store, opts)
}

pub(crate) fn run_methods(
    cfg: &ExperimentConfig,
    methods: &[MethodConfig],
    datasets: &[LoadedDataset],
    store: ResultStore,
    opts: &RunOptions,
) -> Result<ResultStore> {
    let hashes: Vec<String> = methods.iter().map(method_hash).collect();
    let mut tasks = Vec::new();
    for (d, ld) in datasets.iter().enumerate() {
        for s in 0..ld.splits.len() {
            for (m, method) in methods.iter().enumerate() {
                match store.get(&ld.name, &method.tag, ld.splits[s].fold) {
                    Some(r) if r.method_hash == hashes[m] => {}
                    Some(_) => {
                        return Err(anyhow!(
                            "method {:?} changed since its results were stored in {}; use a new output directory",
                            method.tag,
                            store.dir().display()
                        ))
                    }
                    None => tasks.push((d, s, m)),
                }
            }
        }
    }
    let store = Mutex::new(store);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()?;
    let total = tasks.len();
    let done = Mutex::new(0usize);
    let errors: Vec<anyhow::Error> = pool.install(|| {
        tasks
            .par_iter()
            .filter_map(|&(d, s, m)| {
                let ld = &datasets[d];
                let split = &ld.splits[s];
                let method = &methods[m];
                let outcome = run_cell(cfg, ld, split, method, &hashes[m], opts.audit.as_deref())
                    .and_then(|r| store.lock().expect("store lock").append(r))
                    .with_context(|| {
                        format!(
                            "dataset {}, method {}, fold {}",
                            ld.name, method.tag, split.fold
                        )
                    });
                if !opts.quiet {
                    let mut n = done.lock().expect("progress lock");
                    *n += 1;
                    eprintln!(
                        "[{}/{}] {} {} fold {}",
                        *n, total, ld.name, method.tag, split.fold
                    );
                }
                outcome.err()
            })
            .collect()
    });
    let store = store.into_inner().expect("store lock");
    match errors.len() {
        0 => Ok(store),
        n => {
            let first = errors.into_iter().next().unwrap();
            Err(first.context(format!(
                "{} of {} cells failed; finished cells are kept in {}",
                n,
                total,
                store.dir().display()
            )))
        }
    }
}

/// Seed of one cell: master seed, then dataset, fold and method.
pub fn cell_seed(master: u64, dataset: &str, fold: usize, method: &MethodConfig) -> u64 {
    derive_seed(
        master,
        &[tag_hash(dataset), fold as u64, tag_hash(method.seed_tag())],
    )
}

/// Trains and evaluates one method on one fold.
pub fn run_cell(
    cfg: &ExperimentConfig,
    ld: &LoadedDataset,
    split: &FoldSplit,
    method: &MethodConfig,
    method_hash: &str,
    audit: Option<&Audit>,
) -> Result<Record> {
    let start = Instant::now();
    let seed = cell_seed(cfg.split.seed, &ld.name, split.fold, method);
    let mut train = ld.data.subset(&split.train);
    let mut test = ld.data.subset(&split.test);
    if ld.config.standardize {
        let z = Standardizer::fit(train.features())?;
        train = train.with_features(z.transform(train.features())?)?;
        test = test.with_features(z.transform(test.features())?)?;
    }
    let log = |phase, data: &Dataset| {
        if let Some(a) = audit {
            a.record(&ld.name, &method.tag, split.fold, phase, data);
        }
    };
    let n = ld.data.n_classes();
    let spec = &method.classifier;
    let (accuracy, mean_evaluations, hierarchy) = match method.source {
        HierarchySource::SingleBaseline => {
            log(Phase::Training, &train);
            let m = fit_single_multiclass(
                spec,
                train.features(),
                train.labels(),
                n,
                derive_seed(seed, &[2]),
            )?;
            log(Phase::Evaluation, &test);
            (
                accuracy(&predict(&m, test.features())?, test.labels()),
                1.0,
                None,
            )
        }
        HierarchySource::OvaBaseline => {
            log(Phase::Training, &train);
            let m = fit_ova(
                spec,
                train.features(),
                train.labels(),
                n,
                derive_seed(seed, &[2]),
            )?;
            log(Phase::Evaluation, &test);
            (
                accuracy(&predict(&m, test.features())?, test.labels()),
                n as f64,
                None,
            )
        }
        _ => {
            let h = extract_hierarchy(method, &train, derive_seed(seed, &[1]), &log)?;
            log(Phase::Training, &train);
            let th = train_hmc(&h, &train, spec, derive_seed(seed, &[2]))?;
            log(Phase::Evaluation, &test);
            let e = th.evaluate(&test)?;
            (e.accuracy, e.mean_evaluations, Some(h))
        }
    };
    let depth = hierarchy.as_ref().map(|h| h.depth_stats());
    Ok(Record {
        dataset: ld.name.clone(),
        method: method.tag.clone(),
        fold: split.fold,
        accuracy,
        mean_evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
        n_classes: n,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        max_depth: depth.map(|d| d.max_depth),
        mean_leaf_depth: depth.map(|d| d.mean_leaf_depth),
        hierarchy: hierarchy.map(|h| h.canonical_form()).unwrap_or_default(),
        method_hash: method_hash.into(),
    })
}

/// Builds the method's hierarchy from training data only.
pub fn extract_hierarchy(
    method: &MethodConfig,
    train: &Dataset,
    seed: u64,
    log: &dyn Fn(Phase, &Dataset),
) -> Result<Hierarchy> {
    let n = train.n_classes();
    let cluster = |d: &hmc_core::DissimilarityMatrix| match method.clustering {
        Clustering::Hac => hac_build(d),
        Clustering::Hkm => hkm_build_with(d, HkmParams::default(), derive_seed(seed, &[7])),
    };
    Ok(match method.source {
        HierarchySource::Random => sample_random_hierarchy(n, &mut rng_from(seed))?,
        HierarchySource::Rbd => {
            log(Phase::Dissimilarity, train);
            let d = rbd_matrix(train, method.metric)?;
            log(Phase::Extraction, train);
            cluster(&d)
        }
        HierarchySource::Cbd => {
            let plan = method
                .cbd
                .as_ref()
                .ok_or_else(|| anyhow!("cbd method without a plan"))?;
            log(Phase::Dissimilarity, train);
            let d = cbd_matrix(train, plan, derive_seed(seed, &[3]))?;
            log(Phase::Extraction, train);
            cluster(&d)
        }
        HierarchySource::BestOf => {
            log(Phase::Extraction, train);
            best_of_n(
                train,
                &method.classifier,
                method.n_candidates,
                method.cv_folds,
                seed,
            )?
            .hierarchy
        }
        HierarchySource::FixedNewick => {
            let s = method
                .newick
                .as_deref()
                .ok_or_else(|| anyhow!("fixed_newick method without a tree"))?;
            from_newick(s, train.class_names())?
        }
        HierarchySource::OvaBaseline | HierarchySource::SingleBaseline => {
            unreachable!("baselines have no hierarchy")
        }
    })
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}
