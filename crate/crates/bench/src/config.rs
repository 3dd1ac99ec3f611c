//! Experiment configuration, read from a single JSON document.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hmc_core::{CbdPlan, ClassifierSpec, Metric, SplitPlan};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csvio::LabelColumn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Relative paths are resolved against the config file's directory.
    pub path: PathBuf,
    pub label_column: LabelColumn,
    #[serde(default = "yes")]
    pub header: bool,
    /// Defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    /// Z-score every column with statistics of the fold's training rows.
    #[serde(default)]
    pub standardize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchySource {
    Random,
    Rbd,
    Cbd,
    #[serde(alias = "best_of_50")]
    BestOf,
    OvaBaseline,
    SingleBaseline,
    FixedNewick,
}

impl HierarchySource {
    pub fn is_hierarchical(self) -> bool {
        !matches!(
            self,
            HierarchySource::OvaBaseline | HierarchySource::SingleBaseline
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clustering {
    #[default]
    Hac,
    Hkm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub tag: String,
    pub source: HierarchySource,
    /// Base classifier: the node learner, or the baseline's learner.
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub clustering: Clustering,
    #[serde(default = "euclidean")]
    pub metric: Metric,
    #[serde(default)]
    pub cbd: Option<CbdPlan>,
    #[serde(default = "fifty")]
    pub n_candidates: usize,
    #[serde(default = "three")]
    pub cv_folds: usize,
    #[serde(default)]
    pub newick: Option<String>,
    /// Seeds are derived from this instead of `tag` when set, so differently
    /// tagged methods can share random streams.
    #[serde(default)]
    pub seed_tag: Option<String>,
}

fn euclidean() -> Metric {
    Metric::Euclidean
}

fn fifty() -> usize {
    50
}

fn three() -> usize {
    3
}

impl MethodConfig {
    pub fn new(
        tag: impl Into<String>,
        source: HierarchySource,
        classifier: ClassifierSpec,
    ) -> Self {
        Self {
            tag: tag.into(),
            source,
            classifier,
            clustering: Clustering::Hac,
            metric: Metric::Euclidean,
            cbd: None,
            n_candidates: 50,
            cv_folds: 3,
            newick: None,
            seed_tag: None,
        }
    }

    pub fn seed_tag(&self) -> &str {
        self.seed_tag.as_deref().unwrap_or(&self.tag)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tag.is_empty() || self.tag.contains(|c: char| c == ',' || c.is_control()) {
            bail!("method tag {:?} must be nonempty without commas", self.tag);
        }
        self.classifier
            .validate()
            .with_context(|| format!("method {}", self.tag))?;
        match self.source {
            HierarchySource::Cbd => match &self.cbd {
                Some(p) => p
                    .validate()
                    .with_context(|| format!("method {}: cbd plan", self.tag))?,
                None => bail!("method {}: source cbd needs a cbd plan", self.tag),
            },
            HierarchySource::FixedNewick if self.newick.is_none() => {
                bail!(
                    "method {}: source fixed_newick needs a newick string",
                    self.tag
                )
            }
            HierarchySource::BestOf if self.n_candidates == 0 || self.cv_folds < 2 => {
                bail!(
                    "method {}: best_of needs n_candidates >= 1 and cv_folds >= 2",
                    self.tag
                )
            }
            _ => {}
        }
        Ok(())
    }
}

/// Cartesian grid of CBD-classifier complexity against base-classifier complexity.
/// Levels are CART complexity parameters, each used as a one-value grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Template method; must have source `cbd`.
    pub method: MethodConfig,
    pub cbd_levels: Vec<f64>,
    pub base_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub datasets: Vec<DatasetConfig>,
    pub split: SplitPlan,
    #[serde(default)]
    pub methods: Vec<MethodConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for d in &mut self.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    /// Checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.split.validate().context("split plan")?;
        if self.datasets.is_empty() {
            bail!("no datasets configured");
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if !names.insert(self.dataset_name(d)) {
                bail!("duplicate dataset name {:?}", self.dataset_name(d));
            }
        }
        let mut tags = HashSet::new();
        for m in &self.methods {
            m.validate()?;
            if !tags.insert(m.tag.as_str()) {
                bail!("duplicate method tag {:?}", m.tag);
            }
        }
        if let Some(s) = &self.sweep {
            if s.cbd_levels.is_empty() || s.base_levels.is_empty() {
                bail!("sweep axes must be nonempty");
            }
            if s.method.source != HierarchySource::Cbd {
                bail!("sweep template must have source cbd");
            }
            s.method.validate()?;
        }
        Ok(())
    }

    pub fn dataset_name(&self, d: &DatasetConfig) -> String {
        d.name.clone().unwrap_or_else(|| {
            d.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }

    /// SHA-256 over the serialized configuration, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{:02x}", b))
            .collect()
    }
}
