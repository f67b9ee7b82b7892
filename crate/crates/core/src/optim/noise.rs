use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    None,
    /// `g + scale·ξ`
    Additive,
    /// `g ⊙ (1 + scale·ξ)`
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub mode: NoiseMode,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn is_identity(&self) -> bool {
        self.mode == NoiseMode::None || self.scale == 0.0
    }
}

/// Perturbs `g` with per-coordinate standard normal `ξ` drawn from a stream
/// determined by `(cfg.seed, step)`.
pub fn inject_noise(g: &[f64], cfg: &NoiseConfig, step: u64) -> Vec<f64> {
    if cfg.is_identity() {
        return g.to_vec();
    }
    let mut rng = seed::rng(seed::mix(cfg.seed, step));
    g.iter()
        .map(|&x| {
            let xi: f64 = rng.sample(StandardNormal);
            match cfg.mode {
                NoiseMode::Additive => x + cfg.scale * xi,
                NoiseMode::Multiplicative => x * (1.0 + cfg.scale * xi),
                NoiseMode::None => x,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_is_identity() {
        let g = [1.0, -2.0, 3.5];
        for mode in [NoiseMode::None, NoiseMode::Additive, NoiseMode::Multiplicative] {
            let cfg = NoiseConfig { mode, scale: 0.0, seed: 3 };
            assert_eq!(inject_noise(&g, &cfg, 9), g);
        }
    }

    #[test]
    fn multiplicative_keeps_zero() {
        let cfg = NoiseConfig {
            mode: NoiseMode::Multiplicative,
            scale: 0.5,
            seed: 1,
        };
        assert_eq!(inject_noise(&[0.0; 4], &cfg, 2), vec![0.0; 4]);
    }

    #[test]
    fn deterministic_per_step() {
        let cfg = NoiseConfig {
            mode: NoiseMode::Additive,
            scale: 0.01,
            seed: 1,
        };
        let g = [0.0; 3];
        assert_eq!(inject_noise(&g, &cfg, 4), inject_noise(&g, &cfg, 4));
        assert_ne!(inject_noise(&g, &cfg, 4), inject_noise(&g, &cfg, 5));
    }
}
