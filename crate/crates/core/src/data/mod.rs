//! Datasets, fixed augmentation expansion and batching plans.

mod augment;
mod csvio;
mod plan;
mod synthetic;

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

pub use augment::{expand_fixed, AugmentationKind, AugmentationSpec};
pub use csvio::{load_csv, write_csv};
pub use plan::{plan_epoch, BatchMode, BatchPlan};
pub use synthetic::{make_synthetic, SyntheticKind, SyntheticSpec};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    File,
    Expanded,
}

/// Row-major feature matrix with integer labels.
///
/// Immutable once built; every constructor validates that labels lie in
/// `[0, classes)` and that the feature matrix is `n × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
    provenance: Provenance,
    source_seed: u64,
    grid: Option<(usize, usize)>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        dim: usize,
        classes: usize,
        provenance: Provenance,
        source_seed: u64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::config("dataset must contain at least one example"));
        }
        if dim == 0 {
            return Err(Error::config("feature dimension must be at least 1"));
        }
        if classes == 0 {
            return Err(Error::config("class count must be at least 1"));
        }
        if features.len() != n * dim {
            return Err(Error::shape(format!(
                "feature buffer has {} values, expected {n} x {dim}",
                features.len()
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= classes) {
            return Err(Error::config(format!(
                "label {y} of example {i} outside [0, {classes})"
            )));
        }
        Ok(Self {
            features,
            labels,
            dim,
            classes,
            provenance,
            source_seed,
            grid: None,
        })
    }

    /// Declares the features to be `channels × height × width` images, which
    /// enables the `pixel_shift_flip` augmentation.
    pub fn with_grid(mut self, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || !self.dim.is_multiple_of(height * width) {
            return Err(Error::shape(format!(
                "grid {height}x{width} does not tile feature dimension {}",
                self.dim
            )));
        }
        self.grid = Some((height, width));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Per-class example counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Copies the given rows into a new dataset with the same metadata.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::shape(format!("index {i} out of range for {} examples", self.len())));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let mut out = Dataset::new(features, labels, self.dim, self.classes, self.provenance, self.source_seed)?;
        out.grid = self.grid;
        Ok(out)
    }

    /// Byte representation used for determinism checks: features as
    /// little-endian `f64` bits followed by labels as little-endian `u64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.features.len() * 8 + self.labels.len() * 8);
        for x in &self.features {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for &y in &self.labels {
            out.extend_from_slice(&(y as u64).to_le_bytes());
        }
        out
    }
}

/// A view of selected examples of a dataset.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    ds: &'a Dataset,
    indices: Cow<'a, [usize]>,
}

impl<'a> Batch<'a> {
    pub fn new(ds: &'a Dataset, indices: &'a [usize]) -> Self {
        Self {
            ds,
            indices: Cow::Borrowed(indices),
        }
    }

    pub fn owned(ds: &'a Dataset, indices: Vec<usize>) -> Self {
        Self {
            ds,
            indices: Cow::Owned(indices),
        }
    }

    /// Every example, in dataset order.
    pub fn all(ds: &'a Dataset) -> Self {
        Self::owned(ds, (0..ds.len()).collect())
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}
