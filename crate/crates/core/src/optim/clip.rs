use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecmath::norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClipConfig {
    pub max_norm: f64,
    pub fudge: f64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            max_norm: 0.25,
            fudge: 1e-6,
        }
    }
}

/// Global ℓ² clipping: if `‖g‖ > max_norm` the whole vector is scaled by
/// `max_norm / (‖g‖ + fudge)`. Returns the result and whether it was clipped.
pub fn clip_global(g: &[f64], cfg: &ClipConfig) -> Result<(Vec<f64>, bool)> {
    let mut out = g.to_vec();
    let clipped = clip_in_place(&mut out, cfg)?;
    Ok((out, clipped))
}

pub fn clip_in_place(g: &mut [f64], cfg: &ClipConfig) -> Result<bool> {
    let n = norm(g);
    if !n.is_finite() {
        return Err(Error::numeric(format!("cannot clip a gradient with norm {n}")));
    }
    if n > cfg.max_norm {
        let s = cfg.max_norm / (n + cfg.fudge);
        for v in g.iter_mut() {
            *v *= s;
        }
        Ok(true)
    } else {
        Ok(false)
    }
}
