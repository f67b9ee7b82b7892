use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentumConfig {
    pub momentum: f64,
    pub weight_decay: f64,
    pub nesterov: bool,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        Self {
            momentum: 0.9,
            weight_decay: 0.0005,
            nesterov: true,
        }
    }
}

impl MomentumConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config(format!("weight_decay must be nonnegative, got {}", self.weight_decay)));
        }
        Ok(())
    }
}

/// Velocity buffer plus the hyperparameters that drive it.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub buffer: Vec<f64>,
    pub config: MomentumConfig,
}

impl MomentumState {
    pub fn new(len: usize, config: MomentumConfig) -> Self {
        Self {
            buffer: vec![0.0; len],
            config,
        }
    }
}

/// One SGD-with-momentum step, in place.
///
/// `d = g + wd·θ`, `v ← m·v + d`, direction `d + m·v` (Nesterov) or `v`,
/// then `θ ← θ − lr·direction`. Weight decay touches every index, biases included.
pub fn nesterov_update(params: &mut [f64], state: &mut MomentumState, g: &[f64], lr: f64) -> Result<()> {
    if params.len() != g.len() || state.buffer.len() != g.len() {
        return Err(Error::shape(format!(
            "params {}, gradient {}, buffer {} must agree",
            params.len(),
            g.len(),
            state.buffer.len()
        )));
    }
    let MomentumConfig {
        momentum,
        weight_decay,
        nesterov,
    } = state.config;
    for ((p, v), &gi) in params.iter_mut().zip(state.buffer.iter_mut()).zip(g) {
        let d = gi + weight_decay * *p;
        *v = momentum * *v + d;
        let dir = if nesterov { d + momentum * *v } else { *v };
        *p -= lr * dir;
    }
    Ok(())
}
