//! Seeded Gaussian blob datasets for experiments and tests.

use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::seed::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    /// Distance between class centres, in units of the per-feature standard
    /// deviation (which is 1).
    pub separation: f64,
    /// Number of leading features that carry the class signal; the rest are
    /// pure noise.
    pub informative: usize,
    pub seed: u64,
}

impl BlobSpec {
    /// Two balanced classes whose centres differ along the first feature only.
    pub fn new(rows: usize, features: usize, separation: f64, seed: u64) -> Self {
        Self {
            rows,
            features,
            classes: 2,
            separation,
            informative: 1,
            seed,
        }
    }

    /// Class centres. Two classes sit at `±separation/2` along the diagonal of
    /// the informative features; more classes sit on distinct informative
    /// axes at `separation/√2`, so every pair is `separation` apart.
    pub fn centres(&self) -> Vec<Vec<f64>> {
        let k = self.informative.clamp(1, self.features);
        if self.classes == 2 {
            let step = self.separation / 2.0 / (k as f64).sqrt();
            return [-1.0, 1.0]
                .iter()
                .map(|s| {
                    (0..self.features)
                        .map(|j| if j < k { s * step } else { 0.0 })
                        .collect()
                })
                .collect();
        }
        let r = self.separation / std::f64::consts::SQRT_2;
        (0..self.classes)
            .map(|c| {
                (0..self.features)
                    .map(|j| if j == c % k { r } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Rows cycle through the classes (`row i` has class `i % classes`) with
/// unit-variance isotropic noise around each centre.
pub fn gaussian_blobs(spec: &BlobSpec) -> Dataset {
    assert!(spec.classes >= 2 && spec.rows >= spec.classes && spec.features >= 1);
    let centres = spec.centres();
    let mut r = rng(spec.seed);
    let mut rows = Vec::with_capacity(spec.rows);
    let mut labels = Vec::with_capacity(spec.rows);
    for i in 0..spec.rows {
        let c = i % spec.classes;
        rows.push(
            centres[c]
                .iter()
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    m + z
                })
                .collect::<Vec<f64>>(),
        );
        labels.push(c);
    }
    Dataset::from_rows(&rows, &labels).expect("generated blobs are well formed")
}
