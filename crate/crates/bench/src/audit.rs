//! Provenance log for the leakage firewall.
//!
//! Every data slice handed to a learning phase carries the original row indices it
//! was cut from. The runner logs those indices per phase; [`Audit::violations`]
//! intersects them with each fold's test rows afterwards.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use hmc_core::Dataset;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Dissimilarity,
    Extraction,
    /// Model fitting, including the internal cross-validated tuning.
    Training,
    Evaluation,
}

impl Phase {
    /// Phases that must never see a fold's test rows.
    pub fn is_guarded(self) -> bool {
        !matches!(self, Phase::Evaluation)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Access {
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub phase: Phase,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub phase: Phase,
    pub test_rows_seen: usize,
}

#[derive(Debug, Default)]
pub struct Audit {
    log: Mutex<Vec<Access>>,
}

impl Audit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, dataset: &str, method: &str, fold: usize, phase: Phase, data: &Dataset) {
        let access = Access {
            dataset: dataset.into(),
            method: method.into(),
            fold,
            phase,
            rows: data.origins().to_vec(),
        };
        self.log.lock().expect("audit lock").push(access);
    }

    pub fn accesses(&self) -> Vec<Access> {
        self.log.lock().expect("audit lock").clone()
    }

    /// Accesses in any phase that touched the test rows of their own fold.
    /// `test_rows` maps (dataset, fold) to that fold's test indices.
    pub fn touching(
        &self,
        test_rows: &HashMap<(String, usize), HashSet<usize>>,
        guarded_only: bool,
    ) -> Vec<Violation> {
        self.accesses()
            .into_iter()
            .filter(|a| !guarded_only || a.phase.is_guarded())
            .filter_map(|a| {
                let test = test_rows.get(&(a.dataset.clone(), a.fold))?;
                let seen = a.rows.iter().filter(|r| test.contains(r)).count();
                (seen > 0).then_some(Violation {
                    dataset: a.dataset,
                    method: a.method,
                    fold: a.fold,
                    phase: a.phase,
                    test_rows_seen: seen,
                })
            })
            .collect()
    }

    /// Guarded-phase accesses that touched test rows.
    pub fn violations(
        &self,
        test_rows: &HashMap<(String, usize), HashSet<usize>>,
    ) -> Vec<Violation> {
        self.touching(test_rows, true)
    }
}
