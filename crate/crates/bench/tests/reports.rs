#[allow(dead_code)]
mod support;

use hmc_bench::report::{cell, report};
use hmc_bench::sweep::{classcount_csv, classcount_summary};
use hmc_core::stats::compare;
use hmc_core::Direction;
use support::constructed;

fn wobble(base: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| base + 0.004 * ((i * 7 % 5) as f64 - 2.0))
        .collect()
}

#[test]
fn consistent_winner_gets_arrows() {
    let dir = tempfile::tempdir().unwrap();
    let base = wobble(0.80, 20);
    let better: Vec<f64> = base
        .iter()
        .enumerate()
        .map(|(i, a)| a + 0.05 + 1e-4 * (i % 3) as f64)
        .collect();
    let store = constructed(
        dir.path(),
        &[
            ("d", "base", 4, base.clone()),
            ("d", "x", 4, better.clone()),
        ],
    );
    let r = report(&store, "base").unwrap();
    let x = r.rows.iter().find(|r| r.method == "x").unwrap();
    assert_eq!(x.vs_baseline.arrows, 3);
    assert_eq!(x.vs_baseline.direction, Direction::ABetter);
    assert!(cell(x).ends_with("↑↑↑"));

    // the row agrees with an independent call on the same folds
    let fa: Vec<_> = store
        .records_for("d", "x")
        .iter()
        .map(|r| r.fold_record())
        .collect();
    let fb: Vec<_> = store
        .records_for("d", "base")
        .iter()
        .map(|r| r.fold_record())
        .collect();
    assert_eq!(
        compare(&fa, &fb, 1.0 / 9.0).unwrap().p_value,
        x.vs_baseline.p_value
    );

    let csv = r.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .starts_with("dataset,method,folds,mean_accuracy,corrected_se"));
}

#[test]
fn baseline_against_itself_has_no_arrows() {
    let dir = tempfile::tempdir().unwrap();
    let store = constructed(dir.path(), &[("d", "base", 4, wobble(0.9, 20))]);
    let r = report(&store, "base").unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].vs_baseline.arrows, 0);
    assert_eq!(r.rows[0].vs_baseline.direction, Direction::None);
    assert!(!cell(&r.rows[0]).contains('↑') && !cell(&r.rows[0]).contains('↓'));
}

#[test]
fn worse_method_gets_down_arrows_and_missing_baseline_errors() {
    let dir = tempfile::tempdir().unwrap();
    let base = wobble(0.9, 20);
    let worse: Vec<f64> = base
        .iter()
        .enumerate()
        .map(|(i, a)| a - 0.03 - 1e-3 * (i % 4) as f64)
        .collect();
    let store = constructed(dir.path(), &[("d", "base", 4, base), ("d", "y", 4, worse)]);
    let r = report(&store, "base").unwrap();
    let y = r.rows.iter().find(|r| r.method == "y").unwrap();
    assert_eq!(y.vs_baseline.direction, Direction::BBetter);
    assert!(cell(y).contains('↓'));
    assert!(report(&store, "nope").is_err());
}

#[test]
fn cell_formatting() {
    let dir = tempfile::tempdir().unwrap();
    // mean 0.94836, spread chosen so the corrected se rounds to 0.0032
    let accs: Vec<f64> = (0..20)
        .map(|i| 0.94836 + if i % 2 == 0 { 0.00777 } else { -0.00777 })
        .collect();
    let store = constructed(dir.path(), &[("d", "m", 10, accs)]);
    let r = report(&store, "m").unwrap();
    let row = &r.rows[0];
    assert!(
        (row.corrected_se - 0.0032).abs() < 5e-5,
        "{}",
        row.corrected_se
    );
    assert_eq!(cell(row), "0.9484±0.0032");
    assert!(r.to_text().contains("0.9484±0.0032"));
}

#[test]
fn classcount_identity_and_uniform_improvement() {
    let dir = tempfile::tempdir().unwrap();
    let random = wobble(0.5, 10);
    let better: Vec<f64> = random.iter().map(|a| a * 1.1).collect();
    let a = constructed(
        &dir.path().join("a"),
        &[
            ("wide", "random", 30, random.clone()),
            ("wide", "same", 30, random.clone()),
            ("wide", "up", 30, better),
        ],
    );
    let b = constructed(
        &dir.path().join("b"),
        &[
            ("narrow", "random", 4, random.clone()),
            ("narrow", "same", 4, random),
        ],
    );
    let rows = classcount_summary(&[&a, &b], "random").unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(
        rows.iter().map(|r| r.n_classes).collect::<Vec<_>>(),
        [4, 30, 30]
    );
    for r in rows.iter().filter(|r| r.method == "same") {
        assert_eq!(r.relative_difference, 0.0);
    }
    let up = rows.iter().find(|r| r.method == "up").unwrap();
    assert!((up.relative_difference - 0.10).abs() < 1e-12);
    let csv = classcount_csv(&rows).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "dataset,method,n_classes,relative_difference,p_value"
    );
    assert_eq!(csv.lines().count(), 4);

    let c = constructed(&dir.path().join("c"), &[("x", "only", 3, vec![0.5, 0.6])]);
    assert!(classcount_summary(&[&c], "random").is_err());
}
