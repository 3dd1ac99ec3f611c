//! Synthetic datasets with known class geometry.

use hmc_core::rng::rng_from;
use hmc_core::{Dataset, Matrix};
use rand_distr::{Distribution, Normal};

/// Isotropic Gaussian classes around `centers`, `per_class` rows each.
pub fn gaussian_classes(
    name: &str,
    centers: &[Vec<f64>],
    per_class: usize,
    sd: f64,
    seed: u64,
) -> Dataset {
    let mut rng = rng_from(seed);
    let noise = Normal::new(0.0, sd).expect("finite positive sd");
    let dim = centers[0].len();
    let mut data = Vec::with_capacity(centers.len() * per_class * dim);
    let mut labels = Vec::with_capacity(centers.len() * per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            data.extend(center.iter().map(|&m| m + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    let width = (centers.len() - 1).to_string().len();
    let names = (0..centers.len())
        .map(|c| format!("c{:0w$}", c, w = width))
        .collect();
    Dataset::new(
        name,
        Matrix::new(labels.len(), dim, data).expect("shape"),
        labels,
        names,
    )
    .expect("valid synthetic data")
}

/// Super-cluster centres of the two-level geometry. The gaps between them grow
/// from left to right.
pub const SUPER_CENTRES: [[f64; 2]; 4] = [[0.0, 0.0], [20.0, 0.0], [45.0, 5.0], [80.0, -5.0]];

/// Class offsets inside every super-cluster, unevenly spaced along the first axis.
pub const CLASS_OFFSETS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.3], [2.5, -0.2], [4.5, 0.4]];

/// Centres of the 16 classes: 4 super-clusters of 4 classes, classes `4s..4s+3`
/// in super-cluster `s`.
pub fn two_level_centres() -> Vec<Vec<f64>> {
    SUPER_CENTRES
        .iter()
        .flat_map(|s| {
            CLASS_OFFSETS
                .iter()
                .map(move |o| vec![s[0] + o[0], s[1] + o[1]])
        })
        .collect()
}

/// 16 Gaussian classes arranged as 4 well separated super-clusters of 4 close
/// classes each.
pub fn two_level(per_class: usize, sd: f64, seed: u64) -> Dataset {
    gaussian_classes("two_level", &two_level_centres(), per_class, sd, seed)
}
