use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{fit, fit_or_constant, ClassifierSpec, FittedModel, ProbabilisticClassifier};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::derive_seed;

/// One model over all `n` classes. CART handles the multi-class case natively;
/// logistic regression is rejected for `n > 2`.
pub fn fit_single_multiclass(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    n: usize,
    seed: u64,
) -> Result<FittedModel> {
    fit(spec, x, y, n, seed)
}

/// One-vs-All: class `c` against the rest for every class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvaEnsemble {
    pub models: Vec<FittedModel>,
}

pub fn fit_ova(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    n: usize,
    seed: u64,
) -> Result<OvaEnsemble> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "one-vs-all needs at least two classes".into(),
        ));
    }
    let models = (0..n)
        .map(|c| {
            let yc: Vec<usize> = y.iter().map(|&t| (t == c) as usize).collect();
            fit_or_constant(spec, x, &yc, 2, derive_seed(seed, &[c as u64]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OvaEnsemble { models })
}

impl OvaEnsemble {
    /// Positive-class probability of each one-vs-rest model.
    pub fn scores_into(&self, x: &[f64], out: &mut [f64]) {
        let mut p = [0.0; 2];
        for (o, m) in out.iter_mut().zip(&self.models) {
            m.proba_into(x, &mut p);
            *o = p[1];
        }
    }
}

impl ProbabilisticClassifier for OvaEnsemble {
    fn class_arity(&self) -> usize {
        self.models.len()
    }

    fn n_features(&self) -> usize {
        self.models[0].n_features
    }

    /// Positive-class scores normalized to sum to one (argmax unchanged).
    fn proba_into(&self, x: &[f64], out: &mut [f64]) {
        self.scores_into(x, out);
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|v| *v /= total);
        } else {
            let u = 1.0 / out.len() as f64;
            out.iter_mut().for_each(|v| *v = u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{predict, ClassifierSpec};
    use crate::rng::rng_from;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[(f64, f64)], per: usize, sd: f64, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = rng_from(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        let mut data = Vec::new();
        let mut y = Vec::new();
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..per {
                data.push(cx + noise.sample(&mut rng));
                data.push(cy + noise.sample(&mut rng));
                y.push(c);
            }
        }
        (Matrix::new(y.len(), 2, data).unwrap(), y)
    }

    fn acc(p: &[usize], y: &[usize]) -> f64 {
        p.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    const FOUR: [(f64, f64); 4] = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0), (6.0, 6.0)];

    #[test]
    fn ova_on_separated_blobs() {
        let (x, y) = blobs(&FOUR, 100, 0.8, 1);
        let (xt, yt) = blobs(&FOUR, 100, 0.8, 2);
        for spec in [ClassifierSpec::cart(), ClassifierSpec::logistic()] {
            let m = fit_ova(&spec, &x, &y, 4, 9).unwrap();
            assert!(acc(&predict(&m, &xt).unwrap(), &yt) >= 0.95);
        }
    }

    #[test]
    fn single_multiclass_separable_line() {
        let xs: Vec<f64> = (0..90).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..90).map(|i| i / 30).collect();
        let x = Matrix::new(90, 1, xs).unwrap();
        let m = fit_single_multiclass(&ClassifierSpec::cart(), &x, &y, 3, 0).unwrap();
        assert_eq!(acc(&predict(&m, &x).unwrap(), &y), 1.0);
        assert!(fit_single_multiclass(&ClassifierSpec::logistic(), &x, &y, 3, 0).is_err());
    }

    #[test]
    fn two_class_reductions() {
        let (x, y) = blobs(&[(0.0, 0.0), (1.5, 0.5)], 80, 1.0, 5);
        let spec = ClassifierSpec::cart();
        let single = fit_single_multiclass(&spec, &x, &y, 2, 7).unwrap();
        let binary = fit(&spec, &x, &y, 2, 7).unwrap();
        assert_eq!(predict(&single, &x).unwrap(), predict(&binary, &x).unwrap());

        // with two classes the one-vs-all models are complements of each other
        let lspec = ClassifierSpec::logistic();
        let ova = fit_ova(&lspec, &x, &y, 2, 7).unwrap();
        let lr = fit(&lspec, &x, &y, 2, 0).unwrap();
        let a = predict(&ova, &x).unwrap();
        let b = predict(&lr, &x).unwrap();
        let mut p = [0.0; 2];
        for i in 0..x.rows() {
            lr.proba_into(x.row(i), &mut p);
            if (p[1] - 0.5).abs() > 1e-9 {
                assert_eq!(a[i], b[i]);
            }
        }
    }
}
