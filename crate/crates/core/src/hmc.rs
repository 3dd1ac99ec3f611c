//! Training one binary model per internal node and routing instances from the root
//! to a leaf.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, Node, NodeId};
use crate::learners::{fit_or_constant, ClassifierSpec, FittedModel, ProbabilisticClassifier};
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct NodeModel<M> {
    pub node: NodeId,
    pub model: M,
    pub n_train: usize,
}

/// A hierarchy with a binary model (0 = left subtree, 1 = right subtree) at every
/// internal node.
#[derive(Debug, Clone)]
pub struct TrainedHierarchy<M = FittedModel> {
    hierarchy: Hierarchy,
    // indexed by node id; `None` at leaves
    models: Vec<Option<NodeModel<M>>>,
    class_names: Vec<String>,
    n_features: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pub predicted_class: usize,
    pub path: Vec<NodeId>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_evaluations: f64,
    pub max_evaluations: usize,
    pub predictions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: NodeId,
    pub classes: Vec<usize>,
    pub n_train: usize,
    pub chosen_cp: Option<f64>,
    pub tuning_accuracy: Option<f64>,
    pub constant: bool,
    pub converged: bool,
}

/// Per-class side at `node`: `Some(0)` under the left child, `Some(1)` under the
/// right, `None` outside the subtree.
fn sides(h: &Hierarchy, node: NodeId) -> Vec<Option<usize>> {
    let mut s = alloc::vec![None; h.n_classes()];
    if let Some((l, r)) = h.children(node) {
        h.classes_under(l).into_iter().for_each(|c| s[c] = Some(0));
        h.classes_under(r).into_iter().for_each(|c| s[c] = Some(1));
    }
    s
}

/// Fits every internal node on the training rows whose class lies below it.
/// Every class of the hierarchy must be present in `ds_train`.
pub fn train_hmc(
    h: &Hierarchy,
    ds_train: &Dataset,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedHierarchy> {
    if let Some(&class) = ds_train.missing_classes().first() {
        return Err(Error::MissingClass { class });
    }
    train_tolerant(h, ds_train, spec, seed)
}

/// As [`train_hmc`], but classes absent from `ds_train` are allowed; a node whose
/// data has one side empty (or no data at all) gets a constant model.
pub fn train_tolerant(
    h: &Hierarchy,
    ds_train: &Dataset,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedHierarchy> {
    if h.n_classes() != ds_train.n_classes() {
        return Err(Error::Shape(format!(
            "hierarchy has {} classes, dataset {}",
            h.n_classes(),
            ds_train.n_classes()
        )));
    }
    spec.validate()?;
    let x = ds_train.features();
    let labels = ds_train.labels();
    let mut models: Vec<Option<NodeModel<FittedModel>>> = (0..h.n_nodes()).map(|_| None).collect();
    for (k, node) in h.internal_nodes().into_iter().enumerate() {
        let side = sides(h, node);
        let (rows, y): (Vec<usize>, Vec<usize>) = (0..labels.len())
            .filter_map(|i| side[labels[i]].map(|s| (i, s)))
            .unzip();
        let model = if rows.is_empty() {
            FittedModel::constant(spec, &[0, 0], x.cols())
        } else {
            fit_or_constant(
                spec,
                &x.select_rows(&rows),
                &y,
                2,
                derive_seed(seed, &[k as u64]),
            )?
        };
        models[node] = Some(NodeModel {
            node,
            model,
            n_train: rows.len(),
        });
    }
    Ok(TrainedHierarchy {
        hierarchy: h.clone(),
        models,
        class_names: ds_train.class_names().to_vec(),
        n_features: x.cols(),
    })
}

impl<M: ProbabilisticClassifier> TrainedHierarchy<M> {
    /// Assembles a trained hierarchy from externally built node models, one per
    /// internal node, each of class arity 2.
    pub fn from_models(
        h: Hierarchy,
        node_models: Vec<NodeModel<M>>,
        class_names: Vec<String>,
        n_features: usize,
    ) -> Result<Self> {
        if class_names.len() != h.n_classes() {
            return Err(Error::Shape(format!(
                "{} names for {} classes",
                class_names.len(),
                h.n_classes()
            )));
        }
        let mut models: Vec<Option<NodeModel<M>>> = (0..h.n_nodes()).map(|_| None).collect();
        for nm in node_models {
            let node = nm.node;
            if node >= h.n_nodes() || h.children(node).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "node {} is not internal",
                    node
                )));
            }
            if nm.model.class_arity() != 2 || nm.model.n_features() != n_features {
                return Err(Error::InvalidArgument(format!(
                    "node {} model must be binary over {} features",
                    node, n_features
                )));
            }
            if models[node].replace(nm).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "node {} has two models",
                    node
                )));
            }
        }
        if let Some(node) = h
            .internal_nodes()
            .into_iter()
            .find(|&n| models[n].is_none())
        {
            return Err(Error::InvalidArgument(format!(
                "node {} has no model",
                node
            )));
        }
        Ok(Self {
            hierarchy: h,
            models,
            class_names,
            n_features,
        })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn node_models(&self) -> impl Iterator<Item = &NodeModel<M>> + '_ {
        self.hierarchy
            .internal_nodes()
            .into_iter()
            .map(move |n| self.models[n].as_ref().expect("internal node has a model"))
    }

    pub fn model_count(&self) -> usize {
        self.models.iter().filter(|m| m.is_some()).count()
    }

    /// Hard routing: at each node the model's argmax picks the child, ties left.
    pub fn predict_route(&self, x: &[f64]) -> Result<Routing> {
        if x.len() != self.n_features {
            return Err(Error::ColumnMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let mut path = Vec::new();
        let mut id = self.hierarchy.root();
        let mut p = [0.0; 2];
        loop {
            match self.hierarchy.node(id) {
                Node::Leaf { class } => {
                    let evaluations = path.len();
                    return Ok(Routing {
                        predicted_class: class,
                        path,
                        evaluations,
                    });
                }
                Node::Internal { left, right } => {
                    let m = &self.models[id]
                        .as_ref()
                        .expect("internal node has a model")
                        .model;
                    m.proba_into(x, &mut p);
                    path.push(id);
                    id = if p[1] > p[0] { right } else { left };
                }
            }
        }
    }

    /// Accuracy and evaluation cost over a labelled test set.
    pub fn evaluate(&self, ds_test: &Dataset) -> Result<Evaluation> {
        if ds_test.n_rows() == 0 {
            return Err(Error::Empty("test set".into()));
        }
        if ds_test.n_classes() != self.hierarchy.n_classes() {
            return Err(Error::Shape(format!(
                "test set has {} classes, hierarchy {}",
                ds_test.n_classes(),
                self.hierarchy.n_classes()
            )));
        }
        let max_depth = self.hierarchy.depth_stats().max_depth;
        let n = self.hierarchy.n_classes();
        let mut correct = 0usize;
        let mut evals = 0usize;
        let mut max_evaluations = 0usize;
        let mut predictions = Vec::with_capacity(ds_test.n_rows());
        for (row, &truth) in ds_test.features().iter_rows().zip(ds_test.labels()) {
            let r = self.predict_route(row)?;
            assert!(
                r.evaluations >= 1 && r.evaluations <= max_depth && max_depth < n,
                "routing used {} evaluations (max depth {}, {} classes)",
                r.evaluations,
                max_depth,
                n
            );
            correct += (r.predicted_class == truth) as usize;
            evals += r.evaluations;
            max_evaluations = max_evaluations.max(r.evaluations);
            predictions.push(r.predicted_class);
        }
        let m = ds_test.n_rows() as f64;
        Ok(Evaluation {
            accuracy: correct as f64 / m,
            mean_evaluations: evals as f64 / m,
            max_evaluations,
            predictions,
        })
    }
}

impl TrainedHierarchy<FittedModel> {
    /// One row per internal node in preorder.
    pub fn node_summaries(&self) -> Vec<NodeSummary> {
        self.node_models()
            .map(|nm| NodeSummary {
                node: nm.node,
                classes: self.hierarchy.classes_under(nm.node),
                n_train: nm.n_train,
                chosen_cp: nm.model.chosen_cp,
                tuning_accuracy: nm.model.tuning_accuracy,
                constant: nm.model.is_constant(),
                converged: nm.model.converged,
            })
            .collect()
    }
}
