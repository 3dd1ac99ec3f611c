use alloc::format;
use alloc::vec::Vec;

use super::{sample_random_hierarchy, Hierarchy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hmc::train_tolerant;
use crate::learners::ClassifierSpec;
use crate::rng::{derive_seed, rng_from};
use crate::split::stratified_kfold;

#[derive(Debug, Clone)]
pub struct BestOf {
    pub hierarchy: Hierarchy,
    /// Position of the winner among the candidates.
    pub index: usize,
    /// Cross-validated accuracy of every candidate, in candidate order.
    pub scores: Vec<f64>,
}

/// Samples `n_candidates` uniform hierarchies and keeps the one with the best
/// `cv_folds`-fold stratified CV accuracy on `ds_train`.
pub fn best_of_n(
    ds_train: &Dataset,
    spec: &ClassifierSpec,
    n_candidates: usize,
    cv_folds: usize,
    seed: u64,
) -> Result<BestOf> {
    if n_candidates == 0 {
        return Err(Error::InvalidArgument("need at least one candidate".into()));
    }
    let mut rng = rng_from(derive_seed(seed, &[0]));
    let candidates = (0..n_candidates)
        .map(|_| sample_random_hierarchy(ds_train.n_classes(), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    best_of_candidates(ds_train, spec, candidates, cv_folds, seed)
}

/// Scores the given candidates on shared CV folds; ties go to the earliest.
pub fn best_of_candidates(
    ds_train: &Dataset,
    spec: &ClassifierSpec,
    candidates: Vec<Hierarchy>,
    cv_folds: usize,
    seed: u64,
) -> Result<BestOf> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("need at least one candidate".into()));
    }
    if cv_folds < 2 || cv_folds > ds_train.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "{} CV folds for {} rows",
            cv_folds,
            ds_train.n_rows()
        )));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    if candidates.len() == 1 {
        scores.push(f64::NAN);
    } else {
        let assign = stratified_kfold(
            ds_train.labels(),
            ds_train.n_classes(),
            cv_folds,
            derive_seed(seed, &[1]),
        );
        let folds: Vec<(Dataset, Dataset)> = (0..cv_folds)
            .map(|f| {
                let (held, fit): (Vec<usize>, Vec<usize>) =
                    (0..assign.len()).partition(|&i| assign[i] == f);
                (ds_train.subset(&fit), ds_train.subset(&held))
            })
            .filter(|(fit, held)| fit.n_rows() > 0 && held.n_rows() > 0)
            .collect();
        for (c, h) in candidates.iter().enumerate() {
            let mut correct = 0.0;
            let mut total = 0usize;
            for (f, (fit, held)) in folds.iter().enumerate() {
                let th = train_tolerant(h, fit, spec, derive_seed(seed, &[2, c as u64, f as u64]))?;
                let e = th.evaluate(held)?;
                correct += e.accuracy * held.n_rows() as f64;
                total += held.n_rows();
            }
            scores.push(correct / total as f64);
        }
    }
    let mut index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[index] {
            index = i;
        }
    }
    let hierarchy = candidates.into_iter().nth(index).expect("index in range");
    Ok(BestOf {
        hierarchy,
        index,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::tests::balanced;
    use crate::matrix::Matrix;
    use alloc::string::ToString;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Eight classes on a line; a linear node can only cut it into two intervals.
    fn line_classes(per: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(seed);
        let noise = Normal::new(0.0, 0.25).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for c in 0..8 {
            for _ in 0..per {
                x.push(c as f64 + noise.sample(&mut rng));
                y.push(c);
            }
        }
        let names = (0..8).map(|c| c.to_string()).collect();
        Dataset::new("line", Matrix::new(y.len(), 1, x).unwrap(), y, names).unwrap()
    }

    #[test]
    fn single_candidate_is_returned_unscored() {
        let ds = line_classes(6, 0);
        let b = best_of_n(&ds, &ClassifierSpec::logistic(), 1, 3, 4).unwrap();
        let h = sample_random_hierarchy(8, &mut rng_from(derive_seed(4, &[0]))).unwrap();
        assert_eq!(b.hierarchy, h);
        assert_eq!(b.index, 0);
    }

    #[test]
    fn deterministic() {
        let ds = line_classes(10, 1);
        let a = best_of_n(&ds, &ClassifierSpec::logistic(), 6, 3, 11).unwrap();
        let b = best_of_n(&ds, &ClassifierSpec::logistic(), 6, 3, 11).unwrap();
        assert_eq!(a.hierarchy, b.hierarchy);
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn finds_planted_hierarchy() {
        let planted = balanced(8);
        let spec = ClassifierSpec::logistic();
        let mut rng = rng_from(99);
        let mut hits = 0;
        for trial in 0..20 {
            let ds = line_classes(20, 100 + trial);
            let mut candidates: Vec<Hierarchy> = (0..19)
                .map(|_| sample_random_hierarchy(8, &mut rng).unwrap())
                .collect();
            let at = rng.random_range(0..=candidates.len());
            candidates.insert(at, planted.clone());
            let b = best_of_candidates(&ds, &spec, candidates, 3, trial).unwrap();
            hits += (b.hierarchy.canonical_form() == planted.canonical_form()) as usize;
        }
        assert!(hits >= 16, "planted hierarchy chosen {} of 20 times", hits);
    }
}
