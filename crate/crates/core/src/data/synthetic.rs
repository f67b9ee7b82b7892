use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Interleaved spiral arms, one per class, in the first two coordinates.
    Spirals,
    /// Isotropic Gaussian blobs with class means on a circle of radius 2.
    Gaussians,
    /// Concentric rings of radius `1 + class`.
    Rings,
}

impl SyntheticKind {
    /// Default coordinate noise (standard deviation).
    pub fn default_noise(self) -> f64 {
        match self {
            SyntheticKind::Spirals => 0.25,
            SyntheticKind::Gaussians => 1.0,
            SyntheticKind::Rings => 0.2,
        }
    }
}

/// Parameters of a synthetic classification problem.
///
/// The class geometry is fixed by `kind`, `dim` and `classes`; `seed` only
/// drives sampling, so two specs differing in seed draw from the same
/// distribution (which is how held-out sets are produced).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub dim: usize,
    pub classes: usize,
    pub seed: u64,
    pub noise: f64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, n: usize, dim: usize, classes: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            dim,
            classes,
            seed,
            noise: kind.default_noise(),
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        let Self {
            kind,
            n,
            dim,
            classes,
            seed,
            noise,
        } = *self;
        if classes < 2 {
            return Err(Error::config(format!("need at least 2 classes, got {classes}")));
        }
        if n < classes {
            return Err(Error::config(format!("n = {n} is smaller than classes = {classes}")));
        }
        if dim < 2 {
            return Err(Error::config(format!("synthetic data needs dim >= 2, got {dim}")));
        }
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::config(format!("noise must be finite and nonnegative, got {noise}")));
        }

        let mut rng = seed::rng(seed);

        // Balanced labels: every class gets n / classes, and a seed-chosen
        // subset of classes absorbs the remainder.
        let mut extra: Vec<usize> = (0..classes).collect();
        extra.shuffle(&mut rng);
        let mut labels = Vec::with_capacity(n);
        for c in 0..classes {
            let count = n / classes + usize::from(extra[..n % classes].contains(&c));
            labels.extend(std::iter::repeat_n(c, count));
        }
        labels.shuffle(&mut rng);

        let mut features = Vec::with_capacity(n * dim);
        let mut row = vec![0.0; dim];
        for &c in &labels {
            let angle0 = 2.0 * PI * c as f64 / classes as f64;
            let (x, y) = match kind {
                SyntheticKind::Spirals => {
                    let t: f64 = rng.random::<f64>().sqrt();
                    let r = 4.0 * t;
                    let a = angle0 + 1.5 * 2.0 * PI * t;
                    (r * a.cos(), r * a.sin())
                }
                SyntheticKind::Gaussians => (2.0 * angle0.cos(), 2.0 * angle0.sin()),
                SyntheticKind::Rings => {
                    let a = 2.0 * PI * rng.random::<f64>();
                    let r = 1.0 + c as f64;
                    (r * a.cos(), r * a.sin())
                }
            };
            row.iter_mut().for_each(|v| *v = 0.0);
            row[0] = x;
            row[1] = y;
            for v in row.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += noise * z;
            }
            features.extend_from_slice(&row);
        }
        Dataset::new(features, labels, dim, classes, Provenance::Synthetic, seed)
    }
}

/// Builds a balanced synthetic dataset with the kind's default noise level.
pub fn make_synthetic(kind: SyntheticKind, n: usize, dim: usize, classes: usize, seed: u64) -> Result<Dataset> {
    SyntheticSpec::new(kind, n, dim, classes, seed).generate()
}
