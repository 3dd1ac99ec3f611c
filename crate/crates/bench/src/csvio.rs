//! CSV ingestion and export.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hmc_core::{Dataset, DissimilarityMatrix, Matrix};
use serde::{Deserialize, Serialize};

/// Label column by header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// Digits are read as an index, anything else as a name.
    pub fn parse(s: &str) -> Self {
        s.parse()
            .map(LabelColumn::Index)
            .unwrap_or_else(|_| LabelColumn::Name(s.to_string()))
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{}", i),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

/// Reads a dataset. Class names are sorted and labels remapped; every non-label
/// cell must parse as a finite number. Rows and columns in errors are 1-based and
/// count the header line.
pub fn load_csv(path: &Path, label: &LabelColumn, header: bool) -> Result<Dataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut records = rdr.records();
    let mut names: Option<Vec<String>> = None;
    if header {
        let h = records
            .next()
            .ok_or_else(|| anyhow!("{}: empty file", path.display()))??;
        let h: Vec<String> = h.iter().map(|s| s.trim().to_string()).collect();
        let mut seen = HashSet::new();
        if let Some(dup) = h.iter().find(|n| !seen.insert(n.as_str())) {
            bail!("{}: duplicate column name {:?}", path.display(), dup);
        }
        names = Some(h);
    }
    let mut width = names.as_ref().map(|n| n.len());
    let mut label_col = None;
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let first_line = if header { 2 } else { 1 };
    for (r, rec) in records.enumerate() {
        let line = r + first_line;
        let rec = rec.with_context(|| format!("{}: malformed row {}", path.display(), line))?;
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            bail!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                line,
                rec.len(),
                w
            );
        }
        let lc = match label_col {
            Some(c) => c,
            None => {
                let c = resolve_label(label, names.as_deref(), w)
                    .with_context(|| path.display().to_string())?;
                label_col = Some(c);
                c
            }
        };
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if c == lc {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    anyhow!(
                        "{}: row {}, column {}: {:?} is not a finite number",
                        path.display(),
                        line,
                        c + 1,
                        cell
                    )
                })?;
            values.push(v);
        }
    }
    if raw_labels.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let cols = width.unwrap() - 1;
    let x = Matrix::new(raw_labels.len(), cols, values)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset::from_string_labels(name, x, &raw_labels)?)
}

fn resolve_label(label: &LabelColumn, names: Option<&[String]>, width: usize) -> Result<usize> {
    let c = match (label, names) {
        (LabelColumn::Index(i), _) => *i,
        (LabelColumn::Name(n), Some(names)) => names
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| anyhow!("no column named {:?}", n))?,
        (LabelColumn::Name(n), None) => bail!(
            "label column {:?} given by name but the file has no header",
            n
        ),
    };
    if c >= width {
        bail!("label column {} out of range for {} columns", c, width);
    }
    if width < 2 {
        bail!("need at least one feature column besides the label");
    }
    Ok(c)
}

/// Writes features as `x0..x{d-1}` followed by a `label` column with class names.
/// Floats use the shortest representation that reads back to the same value.
pub fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut head: Vec<String> = (0..ds.n_features()).map(|j| format!("x{}", j)).collect();
    head.push("label".into());
    w.write_record(&head)?;
    for (row, &y) in ds.features().iter_rows().zip(ds.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_names()[y].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Square CSV with class names as the header row.
pub fn write_matrix_csv<W: Write>(
    d: &DissimilarityMatrix,
    class_names: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(class_names)?;
    for i in 0..d.n() {
        w.write_record(d.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
