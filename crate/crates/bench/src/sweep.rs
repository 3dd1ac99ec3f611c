//! Complexity grids and cross-dataset summaries built on top of stored runs.

use anyhow::{anyhow, bail, Result};
use hmc_core::stats::{compare, corrected_variance};
use hmc_core::ClassifierKind;
use serde::Serialize;

use crate::config::{ExperimentConfig, MethodConfig};
use crate::runner::{load_datasets, metadata, run_methods, RunOptions};
use crate::store::ResultStore;

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub dataset: String,
    pub cbd_level: f64,
    pub base_level: f64,
    pub mean_accuracy: f64,
    pub corrected_se: f64,
}

/// The method evaluated at one grid cell. All cells share the template's random
/// streams.
pub fn cell_method(
    template: &MethodConfig,
    cbd_level: f64,
    base_level: f64,
) -> Result<MethodConfig> {
    let mut m = template.clone();
    m.tag = format!("{}@cbd={}@base={}", template.tag, cbd_level, base_level);
    m.seed_tag = Some(template.seed_tag().to_string());
    let plan = m
        .cbd
        .as_mut()
        .ok_or_else(|| anyhow!("sweep template needs a cbd plan"))?;
    if plan.classifier.kind != ClassifierKind::Cart || m.classifier.kind != ClassifierKind::Cart {
        bail!("sweep levels are CART complexity parameters; both classifiers must be cart");
    }
    plan.classifier.cart_cp_grid = vec![cbd_level];
    m.classifier.cart_cp_grid = vec![base_level];
    Ok(m)
}

/// Evaluates the full CBD-level × base-level grid under the shared split plan.
pub fn sweep_grid(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(ResultStore, Vec<SweepCell>)> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("config has no sweep section"))?;
    let mut methods = Vec::new();
    for &c in &sweep.cbd_levels {
        for &b in &sweep.base_levels {
            methods.push(cell_method(&sweep.method, c, b)?);
        }
    }
    let datasets = load_datasets(cfg)?;
    let store = ResultStore::open_or_create(&cfg.output_dir, metadata(cfg, &datasets))?;
    let store = run_methods(cfg, &methods, &datasets, store, opts)?;
    let ratio = store.meta().test_train_ratio;
    let mut cells = Vec::new();
    for ld in &datasets {
        let mut i = 0;
        for &c in &sweep.cbd_levels {
            for &b in &sweep.base_levels {
                let accs: Vec<f64> = store
                    .records_for(&ld.name, &methods[i].tag)
                    .iter()
                    .map(|r| r.accuracy)
                    .collect();
                let (mean_accuracy, corrected_se) = corrected_variance(&accs, ratio)?;
                cells.push(SweepCell {
                    dataset: ld.name.clone(),
                    cbd_level: c,
                    base_level: b,
                    mean_accuracy,
                    corrected_se,
                });
                i += 1;
            }
        }
    }
    Ok((store, cells))
}

pub fn sweep_csv(cells: &[SweepCell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassCountRow {
    pub dataset: String,
    pub method: String,
    pub n_classes: usize,
    pub relative_difference: f64,
    pub p_value: f64,
}

/// Per (dataset, method): accuracy relative to the random-hierarchy method,
/// `(acc - acc_random) / acc_random`, with the corrected test's p-value; sorted by
/// class count.
pub fn classcount_summary(stores: &[&ResultStore], random_tag: &str) -> Result<Vec<ClassCountRow>> {
    let mut rows = Vec::new();
    for store in stores {
        let ratio = store.meta().test_train_ratio;
        for ds in store.datasets() {
            let random: Vec<_> = store
                .records_for(&ds, random_tag)
                .iter()
                .map(|r| r.fold_record())
                .collect();
            if random.is_empty() {
                bail!(
                    "store {} has no {:?} records for dataset {}",
                    store.dir().display(),
                    random_tag,
                    ds
                );
            }
            let random_mean = random.iter().map(|r| r.accuracy).sum::<f64>() / random.len() as f64;
            for method in store.methods(&ds) {
                if method == random_tag {
                    continue;
                }
                let recs = store.records_for(&ds, &method);
                let folds: Vec<_> = recs.iter().map(|r| r.fold_record()).collect();
                let m = folds.iter().map(|r| r.accuracy).sum::<f64>() / folds.len() as f64;
                let c = compare(&folds, &random, ratio)?;
                rows.push(ClassCountRow {
                    dataset: ds.clone(),
                    method,
                    n_classes: recs[0].n_classes,
                    relative_difference: (m - random_mean) / random_mean,
                    p_value: c.p_value,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.n_classes
            .cmp(&b.n_classes)
            .then_with(|| a.dataset.cmp(&b.dataset))
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(rows)
}

pub fn classcount_csv(rows: &[ClassCountRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
