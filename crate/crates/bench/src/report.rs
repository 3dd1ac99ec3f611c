//! Comparison tables: mean ± corrected standard error with significance arrows
//! against a baseline method.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use hmc_core::stats::{compare, corrected_variance};
use hmc_core::{ComparisonReport, Direction, FoldRecord};
use serde::Serialize;

use crate::store::{Record, ResultStore};

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    pub folds: usize,
    pub mean_accuracy: f64,
    pub corrected_se: f64,
    pub mean_evaluations: f64,
    pub mean_max_depth: Option<f64>,
    pub mean_leaf_depth: Option<f64>,
    pub vs_baseline: ComparisonReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub baseline: String,
    pub rows: Vec<ReportRow>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// One row per (dataset, method); each method is paired fold by fold with
/// `baseline` on the same dataset.
pub fn report(store: &ResultStore, baseline: &str) -> Result<Report> {
    let ratio = store.meta().test_train_ratio;
    let mut rows = Vec::new();
    let datasets = store.datasets();
    if datasets.is_empty() {
        bail!("store {} holds no records", store.dir().display());
    }
    for ds in datasets {
        let base: Vec<FoldRecord> = store
            .records_for(&ds, baseline)
            .iter()
            .map(|r| r.fold_record())
            .collect();
        if base.is_empty() {
            bail!("baseline {:?} has no records for dataset {}", baseline, ds);
        }
        for method in store.methods(&ds) {
            let recs: Vec<&Record> = store.records_for(&ds, &method);
            let folds: Vec<FoldRecord> = recs.iter().map(|r| r.fold_record()).collect();
            let accs: Vec<f64> = folds.iter().map(|r| r.accuracy).collect();
            let (mean_accuracy, corrected_se) = corrected_variance(&accs, ratio)?;
            rows.push(ReportRow {
                dataset: ds.clone(),
                method: method.clone(),
                folds: folds.len(),
                mean_accuracy,
                corrected_se,
                mean_evaluations: mean(recs.iter().map(|r| r.mean_evaluations)).unwrap_or(f64::NAN),
                mean_max_depth: mean(recs.iter().filter_map(|r| r.max_depth.map(|d| d as f64))),
                mean_leaf_depth: mean(recs.iter().filter_map(|r| r.mean_leaf_depth)),
                vs_baseline: compare(&folds, &base, ratio)?,
            });
        }
    }
    Ok(Report {
        baseline: baseline.into(),
        rows,
    })
}

/// `x` rounded to `sig` significant digits, trailing zeros dropped.
pub fn sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", x);
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `↑`/`↓` repeated once per significance level.
pub fn arrow_marks(c: &ComparisonReport) -> String {
    let mark = match c.direction {
        Direction::ABetter => "↑",
        Direction::BBetter => "↓",
        Direction::None => "",
    };
    mark.repeat(c.arrows as usize)
}

/// Table cell in the form `0.9484±0.0032↑↑`.
pub fn cell(row: &ReportRow) -> String {
    format!(
        "{}±{}{}",
        sig(row.mean_accuracy, 4),
        sig(row.corrected_se, 2),
        arrow_marks(&row.vs_baseline)
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "dataset",
            "method",
            "folds",
            "mean_accuracy",
            "corrected_se",
            "mean_diff",
            "t_stat",
            "p_value",
            "arrows",
            "direction",
            "mean_evaluations",
            "mean_max_depth",
            "mean_leaf_depth",
        ])?;
        for r in &self.rows {
            let c = &r.vs_baseline;
            let direction = match c.direction {
                Direction::ABetter => "better",
                Direction::BBetter => "worse",
                Direction::None => "none",
            };
            w.write_record([
                r.dataset.clone(),
                r.method.clone(),
                r.folds.to_string(),
                r.mean_accuracy.to_string(),
                r.corrected_se.to_string(),
                c.mean_diff.to_string(),
                c.t_stat.to_string(),
                c.p_value.to_string(),
                c.arrows.to_string(),
                direction.into(),
                r.mean_evaluations.to_string(),
                opt(r.mean_max_depth),
                opt(r.mean_leaf_depth),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = None;
        for r in &self.rows {
            if current != Some(&r.dataset) {
                let _ = writeln!(out, "{} (baseline {})", r.dataset, self.baseline);
                let _ = writeln!(
                    out,
                    "  {:<28} {:<22} {:>8} {:>8} {:>8}",
                    "method", "accuracy", "p", "evals", "depth"
                );
                current = Some(&r.dataset);
            }
            let depth = r
                .mean_leaf_depth
                .map(|d| format!("{:.2}", d))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "  {:<28} {:<22} {:>8} {:>8.2} {:>8}",
                r.method,
                cell(r),
                sig(r.vs_baseline.p_value, 2),
                r.mean_evaluations,
                depth
            );
        }
        out
    }
}
