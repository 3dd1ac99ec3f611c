//! Class-pairwise dissimilarities.
//!
//! Representative-based: a metric between class centroids. Classifier-based: the
//! held-out behaviour of an auxiliary classifier, read either as the accuracy on the
//! 2x2 sub-block of the confusion matrix, as distances between row-normalized
//! confusion rows, or through the pairwise argmax of its probability outputs (the
//! all-vs-all proxy). Larger values always mean easier to separate.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{argmax, fit_ova, fit_single_multiclass, predict_proba, ClassifierSpec};
use crate::matrix::Matrix;
use crate::rng::derive_seed;
use crate::split::{monte_carlo_splits, SplitPlan};

/// Symmetric, zero-diagonal, nonnegative `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    method_tag: String,
}

impl DissimilarityMatrix {
    /// Validates the invariants: finite, symmetric within 1e-12, diagonal
    /// exactly 0, off-diagonal >= 0.
    pub fn new(n: usize, values: Vec<f64>, method_tag: impl Into<String>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "{} values for n = {}",
                values.len(),
                n
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {} is not zero",
                    i
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {}",
                        i, j, v
                    )));
                }
                if libm::fabs(v - values[j * n + i]) > 1e-12 {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        Ok(Self {
            n,
            values,
            method_tag: method_tag.into(),
        })
    }

    /// Builds a matrix from a pair function evaluated on `i < j`.
    pub fn from_fn(
        n: usize,
        method_tag: impl Into<String>,
        mut f: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j)?;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values, method_tag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Cosine,
}

/// Row `c` is the mean of the feature rows labelled `c`.
pub fn class_centroids(ds: &Dataset) -> Matrix {
    let d = ds.n_features();
    let mut sums = Matrix::zeros(ds.n_classes(), d);
    let counts = ds.class_counts();
    for (row, &y) in ds.features().iter_rows().zip(ds.labels()) {
        for (s, v) in sums.row_mut(y).iter_mut().zip(row) {
            *s += v;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n as f64);
        }
    }
    sums
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Representative-based dissimilarity: `metric(centroid_j, centroid_k)`.
pub fn rbd_matrix(ds: &Dataset, metric: Metric) -> Result<DissimilarityMatrix> {
    ds.require_all_classes()?;
    let cents = class_centroids(ds);
    let n = ds.n_classes();
    let tag = match metric {
        Metric::Euclidean => "rbd_euclidean",
        Metric::Cosine => "rbd_cosine",
    };
    match metric {
        Metric::Euclidean => {
            DissimilarityMatrix::from_fn(n, tag, |i, j| Ok(euclidean(cents.row(i), cents.row(j))))
        }
        Metric::Cosine => {
            let norms: Vec<f64> = cents
                .iter_rows()
                .map(|r| libm::sqrt(r.iter().map(|v| v * v).sum()))
                .collect();
            if let Some(class) = norms.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroNorm { class });
            }
            DissimilarityMatrix::from_fn(n, tag, |i, j| {
                let dot: f64 = cents
                    .row(i)
                    .iter()
                    .zip(cents.row(j))
                    .map(|(a, b)| a * b)
                    .sum();
                // clamp away rounding noise around identical directions
                Ok((1.0 - dot / (norms[i] * norms[j])).max(0.0))
            })
        }
    }
}

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("confusion matrix must be square".into()));
        }
        Ok(Self {
            n,
            counts: rows.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.n + pred]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.n..(truth + 1) * self.n]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn confusion_matrix(truth: &[usize], pred: &[usize], n: usize) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut counts = alloc::vec![0u64; n * n];
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= n || p >= n {
            return Err(Error::InvalidArgument(format!(
                "label out of range for {} classes",
                n
            )));
        }
        counts[t * n + p] += 1;
    }
    Ok(ConfusionMatrix { n, counts })
}

/// Accuracy on the `{j, k}` sub-block: `(m_jj + m_kk) / (m_jj + m_kk + m_jk + m_kj)`.
/// `None` when the sub-block is empty.
pub fn confusion_subset_dissimilarity(m: &ConfusionMatrix, j: usize, k: usize) -> Option<f64> {
    let hit = m.get(j, j) + m.get(k, k);
    let total = hit + m.get(j, k) + m.get(k, j);
    (total > 0).then(|| hit as f64 / total as f64)
}

/// All-vs-all proxy: over rows whose true label is `j` or `k`, the fraction where
/// the larger of `P(c_j|x)` and `P(c_k|x)` (ties to the lower index) names the true
/// class. `None` when no row carries either label.
pub fn ava_proxy_dissimilarity(
    probas: &Matrix,
    truth: &[usize],
    j: usize,
    k: usize,
) -> Option<f64> {
    let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
    let mut hits = 0usize;
    let mut total = 0usize;
    for (row, &t) in probas.iter_rows().zip(truth) {
        if t != lo && t != hi {
            continue;
        }
        total += 1;
        let pick = if row[hi] > row[lo] { hi } else { lo };
        hits += (pick == t) as usize;
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Euclidean distances between row-normalized confusion rows.
pub fn confusion_row_matrix(m: &ConfusionMatrix) -> Result<DissimilarityMatrix> {
    let rows = normalized_rows(m);
    if let Some(row) = rows.iter().position(|r| r.is_none()) {
        return Err(Error::EmptyRow { row });
    }
    let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.unwrap()).collect();
    DissimilarityMatrix::from_fn(m.n(), "confusion_rows", |i, j| {
        Ok(euclidean(&rows[i], &rows[j]))
    })
}

fn normalized_rows(m: &ConfusionMatrix) -> Vec<Option<Vec<f64>>> {
    (0..m.n())
        .map(|i| {
            let r = m.row(i);
            let s: u64 = r.iter().sum();
            (s > 0).then(|| r.iter().map(|&c| c as f64 / s as f64).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbdScheme {
    SingleMulticlass,
    Ova,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbdVariant {
    AvaProxy,
    ConfusionSubset,
    ConfusionRows,
}

/// What to do with a class pair that has no held-out evidence in any fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoEvidence {
    /// Substitute 0.5, coin-flip separability.
    #[default]
    CoinFlip,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbdPlan {
    pub classifier: ClassifierSpec,
    pub scheme: CbdScheme,
    #[serde(default = "default_mc_folds")]
    pub mc_folds: usize,
    pub variant: CbdVariant,
    #[serde(default)]
    pub no_evidence: NoEvidence,
}

fn default_mc_folds() -> usize {
    10
}

impl CbdPlan {
    pub fn new(classifier: ClassifierSpec, scheme: CbdScheme, variant: CbdVariant) -> Self {
        Self {
            classifier,
            scheme,
            mc_folds: 10,
            variant,
            no_evidence: NoEvidence::CoinFlip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_folds < 2 {
            return Err(Error::InvalidArgument("mc_folds must be at least 2".into()));
        }
        self.classifier.validate()
    }

    fn tag(&self) -> String {
        let scheme = match self.scheme {
            CbdScheme::SingleMulticlass => "single",
            CbdScheme::Ova => "ova",
        };
        let variant = match self.variant {
            CbdVariant::AvaProxy => "ava_proxy",
            CbdVariant::ConfusionSubset => "confusion_subset",
            CbdVariant::ConfusionRows => "confusion_rows",
        };
        format!("cbd_{}_{}", scheme, variant)
    }
}

/// Held-out class-probability rows of the plan's classifier, one block per internal
/// Monte Carlo fold of `ds`.
pub fn cbd_fold_probas(
    ds: &Dataset,
    plan: &CbdPlan,
    seed: u64,
) -> Result<Vec<(Matrix, Vec<usize>)>> {
    plan.validate()?;
    let n = ds.n_classes();
    let split_plan = SplitPlan::new(seed, plan.mc_folds, 0.9)?;
    let splits = monte_carlo_splits(ds, &split_plan)?;
    let mut out = Vec::with_capacity(splits.len());
    for s in splits {
        let train = ds.subset(&s.train);
        let held = ds.subset(&s.test);
        let fit_seed = derive_seed(seed, &[s.fold as u64]);
        let probas = match plan.scheme {
            CbdScheme::SingleMulticlass => {
                let m = fit_single_multiclass(
                    &plan.classifier,
                    train.features(),
                    train.labels(),
                    n,
                    fit_seed,
                )?;
                predict_proba(&m, held.features())?
            }
            CbdScheme::Ova => {
                let m = fit_ova(
                    &plan.classifier,
                    train.features(),
                    train.labels(),
                    n,
                    fit_seed,
                )?;
                predict_proba(&m, held.features())?
            }
        };
        out.push((probas, held.labels().to_vec()));
    }
    Ok(out)
}

/// Classifier-based dissimilarity averaged over `plan.mc_folds` internal splits of
/// `ds`. Pairs without evidence in a fold are left out of that fold's average.
pub fn cbd_matrix(ds: &Dataset, plan: &CbdPlan, seed: u64) -> Result<DissimilarityMatrix> {
    let n = ds.n_classes();
    let folds = cbd_fold_probas(ds, plan, seed)?;
    let mut sum = alloc::vec![0.0; n * n];
    let mut seen = alloc::vec![0usize; n * n];
    for (probas, truth) in &folds {
        let per_fold = fold_matrix(plan.variant, probas, truth, n)?;
        for (idx, v) in per_fold.into_iter().enumerate() {
            if let Some(v) = v {
                sum[idx] += v;
                seen[idx] += 1;
            }
        }
    }
    let tag = plan.tag();
    DissimilarityMatrix::from_fn(n, tag, |i, j| {
        let idx = i * n + j;
        if seen[idx] > 0 {
            Ok(sum[idx] / seen[idx] as f64)
        } else {
            match plan.no_evidence {
                NoEvidence::CoinFlip => Ok(0.5),
                NoEvidence::Error => Err(Error::NoEvidence(i, j)),
            }
        }
    })
}

/// Per-pair values (upper triangle, `i < j`) of one fold; `None` = no evidence.
fn fold_matrix(
    variant: CbdVariant,
    probas: &Matrix,
    truth: &[usize],
    n: usize,
) -> Result<Vec<Option<f64>>> {
    let mut out = alloc::vec![None; n * n];
    match variant {
        CbdVariant::AvaProxy => {
            for i in 0..n {
                for j in i + 1..n {
                    out[i * n + j] = ava_proxy_dissimilarity(probas, truth, i, j);
                }
            }
        }
        CbdVariant::ConfusionSubset | CbdVariant::ConfusionRows => {
            let pred: Vec<usize> = probas.iter_rows().map(argmax).collect();
            let cm = confusion_matrix(truth, &pred, n)?;
            let rows = normalized_rows(&cm);
            for i in 0..n {
                for j in i + 1..n {
                    out[i * n + j] = match variant {
                        CbdVariant::ConfusionSubset => confusion_subset_dissimilarity(&cm, i, j),
                        _ => match (&rows[i], &rows[j]) {
                            (Some(a), Some(b)) => Some(euclidean(a, b)),
                            _ => None,
                        },
                    };
                }
            }
        }
    }
    Ok(out)
}

impl core::fmt::Display for DissimilarityMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}
