//! Class-hierarchy extraction and hierarchical multi-class classification.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithmic piece of
//! the benchmark: datasets and Monte Carlo resampling, the CART and logistic
//! regression learners, class dissimilarities, dendrogram construction, training and
//! routing along a dendrogram, and the corrected resampled t-test. File formats,
//! experiment orchestration and the command line live in `hmc-bench`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod dissimilarity;
pub mod error;
pub mod hierarchy;
pub mod hmc;
pub mod learners;
pub mod matrix;
pub mod rng;
pub mod split;
pub mod stats;

pub use dataset::{Dataset, Standardizer};
pub use dissimilarity::{
    CbdPlan, CbdScheme, CbdVariant, ConfusionMatrix, DissimilarityMatrix, Metric,
};
pub use error::{Error, Result};
pub use hierarchy::{DepthStats, Hierarchy, NodeId};
pub use hmc::{Evaluation, Routing, TrainedHierarchy};
pub use learners::{
    ClassifierKind, ClassifierSpec, FittedModel, OvaEnsemble, ProbabilisticClassifier,
};
pub use matrix::Matrix;
pub use split::{FoldSplit, SplitPlan};
pub use stats::{ComparisonReport, Direction, FoldRecord};
