//! Benchmark harness around `hmc-core`: CSV ingestion, JSON experiment configs,
//! a resumable result store, a parallel fold × method runner, comparison reports
//! and complexity sweeps.

pub mod audit;
pub mod config;
pub mod csvio;
pub mod report;
pub mod runner;
pub mod store;
pub mod sweep;
pub mod synth;

pub use config::{
    Clustering, DatasetConfig, ExperimentConfig, HierarchySource, MethodConfig, SweepConfig,
};
pub use runner::{run_experiment, RunOptions};
pub use store::{Record, ResultStore};
