//! Corrected resampled t-test for Monte Carlo validation, and the Student-t CDF
//! behind its p-values.
//!
//! Training sets of repeated random splits overlap, so the plain variance of the
//! per-fold accuracies underestimates the true one. The corrected estimate
//! multiplies the sample variance by `1/K + n_test/n_train` instead of `1/K`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub method_tag: String,
    pub accuracy: f64,
    pub mean_evaluations: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ABetter,
    BBetter,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub method_a: String,
    pub method_b: String,
    pub mean_diff: f64,
    pub corrected_se: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub df: usize,
    pub arrows: u8,
    pub direction: Direction,
    /// Zero variance with a nonzero mean difference: p is set to 0 by convention.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub mean: f64,
    pub corrected_se: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub df: usize,
    pub degenerate: bool,
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (k - 1.0))
}

/// Sample mean and corrected standard error `sqrt((1/K + ratio) * s^2)`, where
/// `ratio` is the nominal test/train size ratio (1/9 for a 90/10 split).
pub fn corrected_variance(values: &[f64], test_train_ratio: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {}",
            values.len()
        )));
    }
    if !(test_train_ratio > 0.0) || !test_train_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "test/train ratio {} must be positive",
            test_train_ratio
        )));
    }
    let (mean, s2) = mean_var(values);
    let k = values.len() as f64;
    Ok((mean, libm::sqrt((1.0 / k + test_train_ratio) * s2)))
}

/// Two-sided corrected resampled t-test on paired per-fold differences.
pub fn corrected_resampled_t(diffs: &[f64], test_train_ratio: f64) -> Result<TTest> {
    let (mean, se) = corrected_variance(diffs, test_train_ratio)?;
    let df = diffs.len() - 1;
    let (t_stat, p_value, degenerate) = if se > 0.0 {
        let t = mean / se;
        (
            t,
            (2.0 * (1.0 - t_cdf(libm::fabs(t), df as f64)?)).clamp(0.0, 1.0),
            false,
        )
    } else if mean == 0.0 {
        (0.0, 1.0, false)
    } else {
        (
            if mean > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            0.0,
            true,
        )
    };
    Ok(TTest {
        mean,
        corrected_se: se,
        t_stat,
        p_value,
        df,
        degenerate,
    })
}

/// 3 arrows at p <= 0.001, 2 at p <= 0.01, 1 at p <= 0.05.
pub fn arrows(p: f64) -> u8 {
    if p <= 0.001 {
        3
    } else if p <= 0.01 {
        2
    } else if p <= 0.05 {
        1
    } else {
        0
    }
}

/// Pairs the records by fold and tests `a - b`.
pub fn compare(
    a: &[FoldRecord],
    b: &[FoldRecord],
    test_train_ratio: f64,
) -> Result<ComparisonReport> {
    let folds = |r: &[FoldRecord]| {
        let mut v: Vec<(usize, f64)> = r.iter().map(|x| (x.fold, x.accuracy)).collect();
        v.sort_by_key(|x| x.0);
        v
    };
    let (fa, fb) = (folds(a), folds(b));
    let ids = |v: &[(usize, f64)]| v.iter().map(|x| x.0).collect::<Vec<_>>();
    if ids(&fa) != ids(&fb) || fa.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument(format!(
            "fold mismatch: {:?} vs {:?}",
            ids(&fa),
            ids(&fb)
        )));
    }
    let tag = |r: &[FoldRecord]| r.first().map(|x| x.method_tag.clone()).unwrap_or_default();
    let diffs: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x.1 - y.1).collect();
    let t = corrected_resampled_t(&diffs, test_train_ratio)?;
    let n_arrows = arrows(t.p_value);
    let direction = match (n_arrows, t.mean > 0.0) {
        (0, _) => Direction::None,
        (_, true) => Direction::ABetter,
        (_, false) => Direction::BBetter,
    };
    Ok(ComparisonReport {
        method_a: tag(a),
        method_b: tag(b),
        mean_diff: t.mean,
        corrected_se: t.corrected_se,
        t_stat: t.t_stat,
        p_value: t.p_value,
        df: t.df,
        arrows: n_arrows,
        direction,
        degenerate: t.degenerate,
    })
}

/// Student-t CDF with `df` degrees of freedom (real, at least 1).
pub fn t_cdf(x: f64, df: f64) -> Result<f64> {
    if !(df >= 1.0) || !df.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "degrees of freedom {} < 1",
            df
        )));
    }
    if x.is_nan() {
        return Err(Error::InvalidArgument("t_cdf of NaN".into()));
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { 1.0 } else { 0.0 });
    }
    // P(|T| > |x|) = I_{df/(df+x^2)}(df/2, 1/2)
    let tail = 0.5 * reg_inc_beta(df / (df + x * x), 0.5 * df, 0.5);
    Ok(if x >= 0.0 { 1.0 - tail } else { tail })
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let guard = |v: f64| if libm::fabs(v) < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}
