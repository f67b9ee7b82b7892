use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationKind {
    /// Adds `magnitude · N(0, 1)` to every feature.
    GaussianJitter,
    /// For grid-shaped features: shift by up to `magnitude` cells in each axis
    /// (zero padding) and flip horizontally with probability ½.
    PixelShiftFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationSpec {
    pub kind: AugmentationKind,
    pub magnitude: f64,
    pub seed: u64,
}

/// Expands `ds` into `copies · n` examples drawn once and frozen.
///
/// Example `i · n + j` is the `i`-th augmentation of original example `j`;
/// copy `0` is always the identity so the original data embeds in the result.
pub fn expand_fixed(ds: &Dataset, copies: usize, aug: &AugmentationSpec) -> Result<Dataset> {
    if copies == 0 {
        return Err(Error::config("expansion needs at least one copy"));
    }
    if !(aug.magnitude >= 0.0 && aug.magnitude.is_finite()) {
        return Err(Error::config(format!(
            "augmentation magnitude must be finite and nonnegative, got {}",
            aug.magnitude
        )));
    }
    if aug.kind == AugmentationKind::PixelShiftFlip && ds.grid().is_none() {
        return Err(Error::config("pixel_shift_flip needs grid-shaped features (Dataset::with_grid)"));
    }

    let n = ds.len();
    let dim = ds.dim();
    let mut features = Vec::with_capacity(copies * n * dim);
    let mut labels = Vec::with_capacity(copies * n);
    features.extend_from_slice(ds.features());
    labels.extend_from_slice(ds.labels());

    let mut out_row = vec![0.0; dim];
    for copy in 1..copies {
        let mut rng = seed::rng(seed::mix(aug.seed, copy as u64));
        for j in 0..n {
            let src = ds.row(j);
            if aug.magnitude == 0.0 {
                out_row.copy_from_slice(src);
            } else {
                match aug.kind {
                    AugmentationKind::GaussianJitter => {
                        for (o, &x) in out_row.iter_mut().zip(src) {
                            let z: f64 = rng.sample(StandardNormal);
                            *o = x + aug.magnitude * z;
                        }
                    }
                    AugmentationKind::PixelShiftFlip => {
                        let (h, w) = ds.grid().expect("checked above");
                        let max_shift = aug.magnitude.floor() as i64;
                        let dy = rng.random_range(-max_shift..=max_shift);
                        let dx = rng.random_range(-max_shift..=max_shift);
                        let flip = rng.random_bool(0.5);
                        shift_flip(src, &mut out_row, h, w, dy, dx, flip);
                    }
                }
            }
            features.extend_from_slice(&out_row);
            labels.push(ds.label(j));
        }
    }

    let mut out = Dataset::new(features, labels, dim, ds.classes(), Provenance::Expanded, aug.seed)?;
    if let Some((h, w)) = ds.grid() {
        out = out.with_grid(h, w)?;
    }
    Ok(out)
}

/// Output pixel `(r, c)` reads source pixel `(r - dy, c' - dx)` where `c'` is
/// the column after an optional horizontal flip; reads outside the grid are 0.
fn shift_flip(src: &[f64], dst: &mut [f64], h: usize, w: usize, dy: i64, dx: i64, flip: bool) {
    let plane = h * w;
    let channels = src.len() / plane;
    for ch in 0..channels {
        for r in 0..h as i64 {
            for c in 0..w as i64 {
                let sr = r - dy;
                let sc0 = c - dx;
                let v = if sr < 0 || sr >= h as i64 || sc0 < 0 || sc0 >= w as i64 {
                    0.0
                } else {
                    let sc = if flip { w as i64 - 1 - sc0 } else { sc0 };
                    src[ch * plane + sr as usize * w + sc as usize]
                };
                dst[ch * plane + r as usize * w + c as usize] = v;
            }
        }
    }
}
