//! The probabilistic classifier contract and the concrete learners.
//!
//! [`fit`] is the single entry point: it validates the labels, runs the
//! cross-validated complexity-parameter search for CART or IRLS for logistic
//! regression, and wraps the result in a [`FittedModel`]. A node whose labels carry
//! only one class gets [`Error::SingleClass`]; [`fit_or_constant`] turns that into a
//! Laplace-smoothed constant model.

pub mod cart;
pub mod logistic;
mod multiclass;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::split::stratified_kfold;

pub use cart::{GrowParams, Tree};
pub use logistic::LogisticModel;
pub use multiclass::{fit_ova, fit_single_multiclass, OvaEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Cart,
    Logistic,
}

/// Learner configuration. CART defaults follow rpart (Gini, minsplit 20,
/// minbucket 7, maxdepth 30) with the complexity grid 1, 0.1, ..., 1e-6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub cart_cp_grid: Vec<f64>,
    pub cart_min_split: usize,
    pub cart_min_bucket: usize,
    pub cart_max_depth: usize,
    pub logistic_max_iter: usize,
    pub logistic_tol: f64,
    pub tuning_folds: usize,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self::cart()
    }
}

impl ClassifierSpec {
    pub fn cart() -> Self {
        Self {
            kind: ClassifierKind::Cart,
            cart_cp_grid: default_cp_grid(),
            cart_min_split: 20,
            cart_min_bucket: 7,
            cart_max_depth: 30,
            logistic_max_iter: 25,
            logistic_tol: 1e-8,
            tuning_folds: 3,
        }
    }

    pub fn logistic() -> Self {
        Self {
            kind: ClassifierKind::Logistic,
            ..Self::cart()
        }
    }

    pub fn with_cp_grid(mut self, grid: Vec<f64>) -> Self {
        self.cart_cp_grid = grid;
        self
    }

    pub fn grow_params(&self) -> GrowParams {
        GrowParams {
            min_split: self.cart_min_split,
            min_bucket: self.cart_min_bucket,
            max_depth: self.cart_max_depth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if self.cart_cp_grid.is_empty() {
            return bad("cp grid is empty");
        }
        if self.cart_cp_grid.iter().any(|&c| !(c > 0.0 && c <= 1.0)) {
            return bad("cp values must lie in (0, 1]");
        }
        if self.cart_cp_grid.windows(2).any(|w| w[1] >= w[0]) {
            return bad("cp grid must be strictly decreasing");
        }
        if self.cart_min_split == 0 || self.cart_min_bucket == 0 || self.cart_max_depth == 0 {
            return bad("cart_min_split, cart_min_bucket and cart_max_depth must be positive");
        }
        if self.cart_min_bucket > self.cart_min_split {
            return bad("cart_min_bucket exceeds cart_min_split");
        }
        if self.logistic_max_iter == 0 || !(self.logistic_tol > 0.0) {
            return bad("logistic_max_iter and logistic_tol must be positive");
        }
        if self.tuning_folds == 0 {
            return bad("tuning_folds must be positive");
        }
        Ok(())
    }
}

/// `{1, 1e-1, ..., 1e-6}`.
pub fn default_cp_grid() -> Vec<f64> {
    alloc::vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}

/// Anything that maps a feature row to a class-probability vector.
pub trait ProbabilisticClassifier {
    fn class_arity(&self) -> usize;

    fn n_features(&self) -> usize;

    /// Writes `class_arity()` probabilities summing to one into `out`.
    fn proba_into(&self, x: &[f64], out: &mut [f64]);

    fn predict_one(&self, x: &[f64]) -> usize {
        let mut p = alloc::vec![0.0; self.class_arity()];
        self.proba_into(x, &mut p);
        argmax(&p)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Tree(Tree),
    Logistic(LogisticModel),
    /// Laplace-smoothed class frequencies.
    Constant {
        proba: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ClassifierSpec,
    pub class_arity: usize,
    pub n_features: usize,
    pub params: ModelParams,
    /// CART only: the selected complexity parameter.
    pub chosen_cp: Option<f64>,
    /// Cross-validated accuracy of the selected complexity parameter.
    pub tuning_accuracy: Option<f64>,
    /// Logistic only; always true for trees and constants.
    pub converged: bool,
}

impl FittedModel {
    /// A model that ignores its input and returns Laplace-smoothed frequencies of
    /// `counts`.
    pub fn constant(spec: &ClassifierSpec, counts: &[usize], n_features: usize) -> Self {
        let total: usize = counts.iter().sum();
        let denom = (total + counts.len()) as f64;
        let proba = counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
        Self {
            spec: spec.clone(),
            class_arity: counts.len(),
            n_features,
            params: ModelParams::Constant { proba },
            chosen_cp: None,
            tuning_accuracy: None,
            converged: true,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.params, ModelParams::Constant { .. })
    }
}

impl ProbabilisticClassifier for FittedModel {
    fn class_arity(&self) -> usize {
        self.class_arity
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.params {
            ModelParams::Tree(t) => t.proba_into(x, out),
            ModelParams::Logistic(m) => {
                let p = m.positive_probability(x);
                out[0] = 1.0 - p;
                out[1] = p;
            }
            ModelParams::Constant { proba } => out.copy_from_slice(proba),
        }
    }
}

/// Class-probability rows for every row of `x`.
pub fn predict_proba<M: ProbabilisticClassifier + ?Sized>(model: &M, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.n_features() {
        return Err(Error::ColumnMismatch {
            expected: model.n_features(),
            got: x.cols(),
        });
    }
    let k = model.class_arity();
    let mut out = Matrix::zeros(x.rows(), k);
    for i in 0..x.rows() {
        model.proba_into(x.row(i), out.row_mut(i));
    }
    Ok(out)
}

pub fn predict<M: ProbabilisticClassifier + ?Sized>(model: &M, x: &Matrix) -> Result<Vec<usize>> {
    if x.cols() != model.n_features() {
        return Err(Error::ColumnMismatch {
            expected: model.n_features(),
            got: x.cols(),
        });
    }
    Ok(x.iter_rows().map(|r| model.predict_one(r)).collect())
}

fn check_labels(x: &Matrix, y: &[usize], arity: usize) -> Result<Vec<usize>> {
    if x.rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Empty("no training rows".into()));
    }
    if arity < 2 {
        return Err(Error::InvalidArgument(format!("class arity {} < 2", arity)));
    }
    let mut counts = alloc::vec![0; arity];
    for &t in y {
        if t >= arity {
            return Err(Error::InvalidArgument(format!(
                "label {} out of range for arity {}",
                t, arity
            )));
        }
        counts[t] += 1;
    }
    let present: Vec<usize> = (0..arity).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::SingleClass { class: present[0] });
    }
    Ok(counts)
}

/// Fits one model of the requested arity.
///
/// CART picks the complexity parameter with the best `tuning_folds`-fold stratified
/// CV accuracy (ties go to the larger value). Logistic regression is binary only.
pub fn fit(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    arity: usize,
    seed: u64,
) -> Result<FittedModel> {
    spec.validate()?;
    check_labels(x, y, arity)?;
    match spec.kind {
        ClassifierKind::Cart => {
            let (tree, cp, acc) = fit_cart(spec, x, y, arity, seed);
            Ok(FittedModel {
                spec: spec.clone(),
                class_arity: arity,
                n_features: x.cols(),
                params: ModelParams::Tree(tree),
                chosen_cp: Some(cp),
                tuning_accuracy: acc,
                converged: true,
            })
        }
        ClassifierKind::Logistic => {
            if arity != 2 {
                return Err(Error::Unsupported(format!(
                    "logistic regression is binary; arity {} needs one-vs-all or a hierarchy",
                    arity
                )));
            }
            let m = logistic::fit_logistic(x, y, spec.logistic_max_iter, spec.logistic_tol);
            Ok(FittedModel {
                spec: spec.clone(),
                class_arity: 2,
                n_features: x.cols(),
                converged: m.converged,
                params: ModelParams::Logistic(m),
                chosen_cp: None,
                tuning_accuracy: None,
            })
        }
    }
}

/// [`fit`], falling back to a constant model when only one class is present.
pub fn fit_or_constant(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    arity: usize,
    seed: u64,
) -> Result<FittedModel> {
    match fit(spec, x, y, arity, seed) {
        Err(Error::SingleClass { .. }) => {
            let mut counts = alloc::vec![0; arity];
            y.iter().for_each(|&t| counts[t] += 1);
            Ok(FittedModel::constant(spec, &counts, x.cols()))
        }
        other => other,
    }
}

fn fit_cart(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    arity: usize,
    seed: u64,
) -> (Tree, f64, Option<f64>) {
    let grid = &spec.cart_cp_grid;
    let params = spec.grow_params();
    let (chosen, acc) = if grid.len() == 1 {
        (grid[0], None)
    } else {
        let folds = spec.tuning_folds.min(y.len()).max(2);
        let assign = stratified_kfold(y, arity, folds, seed);
        let mut correct = alloc::vec![0usize; grid.len()];
        let mut total = 0usize;
        for f in 0..folds {
            let train: Vec<usize> = (0..y.len()).filter(|&i| assign[i] != f).collect();
            let held: Vec<usize> = (0..y.len()).filter(|&i| assign[i] == f).collect();
            if held.is_empty() || train.is_empty() {
                continue;
            }
            total += held.len();
            let ytr: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            let first = ytr[0];
            if ytr.iter().all(|&t| t == first) {
                let hits = held.iter().filter(|&&i| y[i] == first).count();
                correct.iter_mut().for_each(|c| *c += hits);
                continue;
            }
            let tree = cart::grow(&x.select_rows(&train), &ytr, arity, &params);
            let root_risk = tree.root_risk();
            for (g, &cp) in grid.iter().enumerate() {
                let pruned = tree.prune(cp * root_risk);
                correct[g] += held
                    .iter()
                    .filter(|&&i| pruned.predict_class(x.row(i)) == y[i])
                    .count();
            }
        }
        let mut best = 0;
        for g in 1..grid.len() {
            if correct[g] > correct[best] {
                best = g;
            }
        }
        (
            grid[best],
            (total > 0).then(|| correct[best] as f64 / total as f64),
        )
    };
    let full = cart::grow(x, y, arity, &params);
    let tree = full.prune(chosen * full.root_risk());
    (tree, chosen, acc)
}
