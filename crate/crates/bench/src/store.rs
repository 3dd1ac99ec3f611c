//! Append-only result store: `records.csv` plus `metadata.json` in one directory.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hmc_core::{FoldRecord, SplitPlan};
use serde::{Deserialize, Serialize};

pub const RECORDS: &str = "records.csv";
pub const METADATA: &str = "metadata.json";

/// One (dataset, method, fold) outcome. Baselines leave the hierarchy fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub accuracy: f64,
    pub mean_evaluations: f64,
    pub wall_time_s: f64,
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub max_depth: Option<usize>,
    pub mean_leaf_depth: Option<f64>,
    pub hierarchy: String,
    pub method_hash: String,
}

impl Record {
    pub fn key(&self) -> (String, String, usize) {
        (self.dataset.clone(), self.method.clone(), self.fold)
    }

    pub fn fold_record(&self) -> FoldRecord {
        FoldRecord {
            fold: self.fold,
            method_tag: self.method.clone(),
            accuracy: self.accuracy,
            mean_evaluations: self.mean_evaluations,
            wall_time_s: self.wall_time_s,
        }
    }

    /// Equality of everything except the timing.
    pub fn same_outcome(&self, other: &Record) -> bool {
        let strip = |r: &Record| Record {
            wall_time_s: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub split: SplitPlan,
    /// Nominal test/train ratio used by the corrected variance.
    pub test_train_ratio: f64,
    pub datasets: Vec<DatasetMeta>,
    pub version: String,
}

#[derive(Debug)]
pub struct ResultStore {
    dir: PathBuf,
    meta: Metadata,
    records: Vec<Record>,
    index: HashMap<(String, String, usize), usize>,
}

impl ResultStore {
    /// Opens an existing store for resumption or creates a new one. A store created
    /// under a different split plan is refused, since paired comparisons need one
    /// plan.
    pub fn open_or_create(dir: &Path, meta: Metadata) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let meta_path = dir.join(METADATA);
        if meta_path.exists() {
            let old = read_meta(dir)?;
            if old.split != meta.split {
                bail!(
                    "{} was created with split plan {:?}, config has {:?}",
                    dir.display(),
                    old.split,
                    meta.split
                );
            }
        }
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
        let records = read_records(dir)?;
        Self::assemble(dir, meta, records)
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let meta = read_meta(dir)?;
        let records = read_records(dir)?;
        Self::assemble(dir, meta, records)
    }

    fn assemble(dir: &Path, meta: Metadata, records: Vec<Record>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.key(), i).is_some() {
                bail!("{}: duplicate record for {:?}", dir.display(), r.key());
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            meta,
            records,
            index,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> &Metadata {
        &self.meta
    }

    pub fn get(&self, dataset: &str, method: &str, fold: usize) -> Option<&Record> {
        self.index
            .get(&(dataset.to_string(), method.to_string(), fold))
            .map(|&i| &self.records[i])
    }

    /// Appends and flushes one record; an existing key is an error.
    pub fn append(&mut self, r: Record) -> Result<()> {
        if self.index.contains_key(&r.key()) {
            bail!("record {:?} already stored", r.key());
        }
        let path = self.dir.join(RECORDS);
        let fresh = !path.exists() || fs::metadata(&path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(fresh)
            .from_writer(file);
        w.serialize(&r)?;
        w.flush()?;
        self.index.insert(r.key(), self.records.len());
        self.records.push(r);
        Ok(())
    }

    /// All records ordered by (dataset, method, fold).
    pub fn records(&self) -> Vec<&Record> {
        let mut v: Vec<&Record> = self.records.iter().collect();
        v.sort_by_key(|r| r.key());
        v
    }

    pub fn records_for(&self, dataset: &str, method: &str) -> Vec<&Record> {
        self.records()
            .into_iter()
            .filter(|r| r.dataset == dataset && r.method == method)
            .collect()
    }

    /// Distinct dataset names, then method tags, in first-seen file order.
    pub fn datasets(&self) -> Vec<String> {
        first_seen(self.records.iter().map(|r| r.dataset.clone()))
    }

    pub fn methods(&self, dataset: &str) -> Vec<String> {
        first_seen(
            self.records
                .iter()
                .filter(|r| r.dataset == dataset)
                .map(|r| r.method.clone()),
        )
    }
}

fn first_seen(it: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn read_meta(dir: &Path) -> Result<Metadata> {
    let p = dir.join(METADATA);
    let text = fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid {}", p.display()))
}

fn read_records(dir: &Path) -> Result<Vec<Record>> {
    let p = dir.join(RECORDS);
    if !p.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(&p)?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{}: bad record on line {}", p.display(), i + 2)))
        .collect()
}
