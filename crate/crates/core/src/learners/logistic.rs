//! Unregularized binary logistic regression fitted by iteratively reweighted
//! least squares with step halving.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::{solve_spd, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Intercept first, then one coefficient per feature.
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

#[inline]
fn log1p_exp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + libm::log1p(libm::exp(-eta))
    } else {
        libm::log1p(libm::exp(eta))
    }
}

#[inline]
pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.coef[0]
            + self.coef[1..]
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    /// P(y = 1 | x).
    pub fn positive_probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(x))
    }

    pub fn n_features(&self) -> usize {
        self.coef.len() - 1
    }
}

fn log_likelihood(x: &Matrix, y: &[usize], beta: &[f64]) -> f64 {
    x.iter_rows()
        .zip(y)
        .map(|(row, &t)| {
            let eta = beta[0] + beta[1..].iter().zip(row).map(|(b, v)| b * v).sum::<f64>();
            (t as f64) * eta - log1p_exp(eta)
        })
        .sum()
}

/// Fits `y in {0,1}` on `x`. Stops when the relative log-likelihood change drops to
/// `tol` or after `max_iter` Newton steps. Perfectly separated data never meets the
/// relative criterion (the likelihood keeps shrinking geometrically towards zero),
/// so those fits end at `max_iter` with `converged == false`.
pub fn fit_logistic(x: &Matrix, y: &[usize], max_iter: usize, tol: f64) -> LogisticModel {
    let p = x.cols() + 1;
    let mut beta = alloc::vec![0.0; p];
    let mut ll = log_likelihood(x, y, &beta);
    let mut converged = false;
    let mut iterations = 0;
    let mut hess = alloc::vec![0.0; p * p];
    let mut grad = alloc::vec![0.0; p];
    let mut z = alloc::vec![0.0; p];

    for it in 1..=max_iter {
        hess.iter_mut().for_each(|v| *v = 0.0);
        grad.iter_mut().for_each(|v| *v = 0.0);
        for (row, &t) in x.iter_rows().zip(y) {
            z[0] = 1.0;
            z[1..].copy_from_slice(row);
            let eta: f64 = beta.iter().zip(&z).map(|(b, v)| b * v).sum();
            let mu = sigmoid(eta);
            let w = mu * (1.0 - mu);
            let r = t as f64 - mu;
            for i in 0..p {
                grad[i] += r * z[i];
                let wz = w * z[i];
                for j in 0..=i {
                    hess[i * p + j] += wz * z[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                hess[j * p + i] = hess[i * p + j];
            }
        }
        let Some(delta) = solve_spd(&hess, &grad, p) else {
            break;
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let ll_cand = log_likelihood(x, y, &cand);
            if ll_cand.is_finite() && ll_cand >= ll - 1e-8 {
                accepted = Some((cand, ll_cand));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, ll_new)) = accepted else {
            break;
        };
        let change = ll_new - ll;
        beta = cand;
        ll = ll_new;
        iterations = it;
        if ll == 0.0 {
            break;
        }
        if libm::fabs(change) <= tol * libm::fabs(ll) {
            converged = true;
            break;
        }
    }

    LogisticModel {
        coef: beta,
        iterations,
        converged,
        log_likelihood: ll,
    }
}
