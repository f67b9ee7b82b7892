//! Desk-scale analogs of the baseline and full-batch training recipes.
//!
//! All presets train a `[2, 64, 64, 2]` ReLU MLP on 1000 spiral points with a
//! 1000-point held-out set. Step budgets keep the ratios of the full-size
//! recipes rather than their absolute counts: SGD runs 60 epochs of
//! mini-batches, baseline full-batch runs 60 steps (one per epoch), and the
//! long full-batch recipes run 10× that.

use std::fmt;
use std::str::FromStr;

use crate::data::{BatchMode, BatchPlan};
use crate::error::{Error, Result};
use crate::harness::{DatasetDescriptor, SnapshotPolicy, TrainConfig};
use crate::model::{LossConfig, ModelSpec};
use crate::optim::{ClipConfig, MomentumConfig, NoiseConfig, NoiseMode, Schedule};
use crate::reg::RegConfig;

pub const DESK_EPOCHS: u64 = 60;
pub const DESK_TRAIN_SIZE: usize = 1000;
pub const SGD_BATCH: usize = 32;
pub const SGD_PEAK_LR: f64 = 0.1;
pub const SGD_WARMUP_EPOCHS: u64 = 5;
pub const LONG_STEPS: u64 = 10 * DESK_EPOCHS;
pub const REG_BLOCK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    BaselineSgd,
    SgdRegularized,
    FbBase,
    FbLong,
    FbClip,
    FbReg,
    FbStrong,
    FbPractice,
    FbNoiseAdditive,
    FbNoiseMultiplicative,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::BaselineSgd,
        Preset::SgdRegularized,
        Preset::FbBase,
        Preset::FbLong,
        Preset::FbClip,
        Preset::FbReg,
        Preset::FbStrong,
        Preset::FbPractice,
        Preset::FbNoiseAdditive,
        Preset::FbNoiseMultiplicative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::BaselineSgd => "baseline_sgd",
            Preset::SgdRegularized => "sgd_regularized",
            Preset::FbBase => "fb_base",
            Preset::FbLong => "fb_long",
            Preset::FbClip => "fb_clip",
            Preset::FbReg => "fb_reg",
            Preset::FbStrong => "fb_strong",
            Preset::FbPractice => "fb_practice",
            Preset::FbNoiseAdditive => "fb_noise_additive",
            Preset::FbNoiseMultiplicative => "fb_noise_multiplicative",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Usage(format!("unknown preset {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

fn common(total_steps: u64) -> TrainConfig {
    TrainConfig {
        model: ModelSpec::new(vec![2, 64, 64, 2]),
        loss: LossConfig::default(),
        schedule: Schedule::scaled(0.4, total_steps),
        clip: None,
        reg: None,
        noise: NoiseConfig::default(),
        optimizer: MomentumConfig::default(),
        batch_plan: BatchPlan::full_batch(),
        accumulation_block: 128,
        dataset: DatasetDescriptor::Synthetic {
            kind: crate::data::SyntheticKind::Spirals,
            n: DESK_TRAIN_SIZE,
            n_val: 1000,
            dim: 2,
            classes: 2,
            seed: 1,
            val_seed: 2,
            noise: None,
        },
        eval_every: (total_steps / 20).max(1),
        run_seed: 0,
        snapshot_policy: SnapshotPolicy::Both,
    }
}

/// Warmup over the first `SGD_WARMUP_EPOCHS` worth of steps, then cosine to zero.
fn sgd_schedule(steps_per_epoch: u64) -> Schedule {
    let total = DESK_EPOCHS * steps_per_epoch;
    let warmup = SGD_WARMUP_EPOCHS * steps_per_epoch;
    Schedule {
        peak_lr: SGD_PEAK_LR,
        warmup_steps: warmup,
        anneal_horizon: total - warmup,
        total_steps: total,
    }
}

pub fn preset(p: Preset) -> TrainConfig {
    match p {
        Preset::BaselineSgd => {
            let steps_per_epoch = DESK_TRAIN_SIZE.div_ceil(SGD_BATCH) as u64;
            TrainConfig {
                schedule: sgd_schedule(steps_per_epoch),
                batch_plan: BatchPlan {
                    mode: BatchMode::WithoutReplacement,
                    batch_size: SGD_BATCH,
                    seed: 0,
                },
                eval_every: steps_per_epoch,
                ..common(DESK_EPOCHS * steps_per_epoch)
            }
        }
        Preset::SgdRegularized => TrainConfig {
            reg: preset(Preset::FbStrong).reg,
            ..preset(Preset::BaselineSgd)
        },
        // SGD hyperparameters, one full-batch step per epoch.
        Preset::FbBase => TrainConfig {
            schedule: sgd_schedule(1),
            ..common(DESK_EPOCHS)
        },
        Preset::FbLong => common(LONG_STEPS),
        Preset::FbClip => TrainConfig {
            clip: Some(ClipConfig::default()),
            ..preset(Preset::FbLong)
        },
        Preset::FbReg => TrainConfig {
            reg: Some(RegConfig {
                alpha: 1.0,
                block_size: REG_BLOCK,
                ..RegConfig::default()
            }),
            ..preset(Preset::FbClip)
        },
        Preset::FbStrong => {
            let base = preset(Preset::FbReg);
            let reg = base.reg.map(|r| RegConfig {
                block_size: r.block_size / 4,
                ..r
            });
            TrainConfig {
                reg,
                schedule: Schedule {
                    peak_lr: 2.0 * base.schedule.peak_lr,
                    ..base.schedule
                },
                ..base
            }
        }
        // Full-batch steps over a freshly shuffled block assignment each step.
        Preset::FbPractice => TrainConfig {
            batch_plan: BatchPlan {
                mode: BatchMode::WithoutReplacement,
                batch_size: DESK_TRAIN_SIZE,
                seed: 0,
            },
            ..preset(Preset::FbStrong)
        },
        Preset::FbNoiseAdditive => TrainConfig {
            noise: NoiseConfig {
                mode: NoiseMode::Additive,
                scale: 0.01,
                seed: 0,
            },
            ..preset(Preset::FbBase)
        },
        Preset::FbNoiseMultiplicative => TrainConfig {
            noise: NoiseConfig {
                mode: NoiseMode::Multiplicative,
                scale: 0.01,
                seed: 0,
            },
            ..preset(Preset::FbBase)
        },
    }
}
