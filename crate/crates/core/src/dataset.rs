//! Labelled feature matrices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A feature matrix with integer class labels and the class-name registry.
///
/// Datasets built through [`Dataset::new`] contain every registered class at least
/// once. Row subsets produced by [`Dataset::subset`] keep the full registry (class
/// indices stay comparable across folds) and may lack classes; use
/// [`Dataset::require_all_classes`] where a subset must cover every class.
///
/// `origins` maps each row back to its row index in the originally ingested data.
/// Subsets compose it, which is what the runner's leakage audit inspects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    origins: Vec<usize>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        for (i, row) in features.iter_rows().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        let distinct: BTreeSet<&String> = class_names.iter().collect();
        if distinct.len() != class_names.len() {
            return Err(Error::InvalidDataset("duplicate class names".to_string()));
        }
        let n = class_names.len();
        let mut seen = alloc::vec![false; n];
        for &y in &labels {
            if y >= n {
                return Err(Error::InvalidDataset(format!(
                    "label {} out of range for {} classes",
                    y, n
                )));
            }
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!(
                "class {:?} has no instances",
                class_names[c]
            )));
        }
        let origins = (0..labels.len()).collect();
        Ok(Self {
            name: name.into(),
            features,
            labels,
            class_names,
            origins,
        })
    }

    /// Builds a dataset from raw string labels. Class names are sorted
    /// lexicographically and labels remapped to their positions.
    pub fn from_string_labels<S: AsRef<str>>(
        name: impl Into<String>,
        features: Matrix,
        raw: &[S],
    ) -> Result<Self> {
        let names: BTreeSet<&str> = raw.iter().map(|s| s.as_ref()).collect();
        let class_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let labels = raw
            .iter()
            .map(|s| {
                class_names
                    .binary_search_by(|c| c.as_str().cmp(s.as_ref()))
                    .expect("name registered")
            })
            .collect();
        Self::new(name, features, labels, class_names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Row indices grouped by class, ascending within each class.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.n_classes()];
        for (i, &y) in self.labels.iter().enumerate() {
            out[y].push(i);
        }
        out
    }

    pub fn missing_classes(&self) -> Vec<usize> {
        self.class_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn require_all_classes(&self) -> Result<()> {
        match self.missing_classes().first() {
            Some(&class) => Err(Error::MissingClass { class }),
            None => Ok(()),
        }
    }

    /// The rows at `idx`, in that order, keeping the class registry.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            origins: idx.iter().map(|&i| self.origins[i]).collect(),
        }
    }

    /// Same rows and labels with a replacement feature matrix.
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        if features.rows() != self.n_rows() {
            return Err(Error::Shape(format!(
                "{} rows, expected {}",
                features.rows(),
                self.n_rows()
            )));
        }
        Ok(Dataset {
            features,
            ..self.clone()
        })
    }
}

/// Per-column z-scoring. Fitted on training rows only; constant columns are
/// centred but left unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Empty("cannot standardize zero rows".to_string()));
        }
        let n = x.rows() as f64;
        let mut mean = alloc::vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::ColumnMismatch {
                expected: self.mean.len(),
                got: x.cols(),
            });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        Ok(out)
    }
}
