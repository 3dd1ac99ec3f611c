//! Stratified Monte Carlo resampling and k-fold assignment.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub n_folds: usize,
    pub train_fraction: f64,
}

impl SplitPlan {
    pub fn new(seed: u64, n_folds: usize, train_fraction: f64) -> Result<Self> {
        let plan = Self {
            seed,
            n_folds,
            train_fraction,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_folds == 0 {
            return Err(Error::InvalidPlan("n_folds must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidPlan(format!(
                "train_fraction {} outside (0,1)",
                self.train_fraction
            )));
        }
        Ok(())
    }

    /// Nominal n_test / n_train ratio used by the corrected variance.
    pub fn test_train_ratio(&self) -> f64 {
        (1.0 - self.train_fraction) / self.train_fraction
    }

    /// Number of training rows drawn from a class with `count` rows.
    pub fn train_count(&self, count: usize) -> usize {
        let t = libm::round(self.train_fraction * count as f64) as usize;
        t.clamp(1.min(count), count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold: usize,
    /// Ascending row indices.
    pub train: Vec<usize>,
    /// Ascending row indices.
    pub test: Vec<usize>,
}

/// One stratified split: per class, rows are shuffled by a stream seeded with
/// `seed ^ fold` and the first `round(train_fraction * count)` (at least one) go
/// to training.
pub fn fold_split(ds: &Dataset, plan: &SplitPlan, fold: usize) -> Result<FoldSplit> {
    plan.validate()?;
    let mut rng = rng_from(plan.seed ^ fold as u64);
    let mut train = Vec::with_capacity(ds.n_rows());
    let mut test = Vec::new();
    for (class, mut idx) in ds.class_indices().into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let k = plan.train_count(idx.len());
        if k == 0 {
            return Err(Error::ClassTooSmall { class });
        }
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    if test.is_empty() {
        return Err(Error::InvalidPlan(
            "every class is too small to leave a test row".into(),
        ));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(FoldSplit { fold, train, test })
}

/// All `plan.n_folds` Monte Carlo splits.
pub fn monte_carlo_splits(ds: &Dataset, plan: &SplitPlan) -> Result<Vec<FoldSplit>> {
    (0..plan.n_folds).map(|f| fold_split(ds, plan, f)).collect()
}

/// Stratified k-fold assignment: returns the fold id of every row. Rows of each
/// class are shuffled and dealt round-robin, continuing the rotation across classes
/// so fold sizes differ by at most one.
pub fn stratified_kfold(labels: &[usize], n_classes: usize, k: usize, seed: u64) -> Vec<usize> {
    let k = k.max(1);
    let mut by_class = alloc::vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut rng = rng_from(seed);
    let mut assign = alloc::vec![0; labels.len()];
    let mut next = 0;
    for mut idx in by_class {
        idx.shuffle(&mut rng);
        for i in idx {
            assign[i] = next % k;
            next += 1;
        }
    }
    assign
}
