use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    expand_fixed, load_csv, AugmentationSpec, BatchMode, BatchPlan, Dataset, SyntheticKind, SyntheticSpec,
};
use crate::error::{Error, Result, ValidationIssue};
use crate::model::{LossConfig, ModelSpec};
use crate::optim::{ClipConfig, MomentumConfig, NoiseConfig, Schedule};
use crate::reg::RegConfig;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    Last,
    BestValidation,
    #[default]
    Both,
}

impl SnapshotPolicy {
    pub fn keeps_last(self) -> bool {
        matches!(self, SnapshotPolicy::Last | SnapshotPolicy::Both)
    }

    pub fn keeps_best(self) -> bool {
        matches!(self, SnapshotPolicy::BestValidation | SnapshotPolicy::Both)
    }
}

/// Where training (and validation) examples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetDescriptor {
    /// Generated train set plus an independently seeded held-out set drawn
    /// from the same distribution.
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        #[serde(default)]
        n_val: usize,
        dim: usize,
        classes: usize,
        seed: u64,
        val_seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<f64>,
    },
    File {
        train: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        val: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classes: Option<usize>,
    },
    /// A base dataset whose training part is expanded into fixed augmented copies.
    Expanded {
        base: Box<DatasetDescriptor>,
        copies: usize,
        augmentation: AugmentationSpec,
    },
}

impl Default for DatasetDescriptor {
    fn default() -> Self {
        DatasetDescriptor::Synthetic {
            kind: SyntheticKind::Spirals,
            n: 1000,
            n_val: 1000,
            dim: 2,
            classes: 2,
            seed: 1,
            val_seed: 2,
            noise: None,
        }
    }
}

impl DatasetDescriptor {
    /// Training set and optional validation set.
    pub fn load(&self) -> Result<(Dataset, Option<Dataset>)> {
        match self {
            DatasetDescriptor::Synthetic {
                kind,
                n,
                n_val,
                dim,
                classes,
                seed,
                val_seed,
                noise,
            } => {
                let mut spec = SyntheticSpec::new(*kind, *n, *dim, *classes, *seed);
                if let Some(noise) = noise {
                    spec.noise = *noise;
                }
                let train = spec.generate()?;
                let val = if *n_val > 0 {
                    Some(
                        SyntheticSpec {
                            n: *n_val,
                            seed: *val_seed,
                            ..spec
                        }
                        .generate()?,
                    )
                } else {
                    None
                };
                Ok((train, val))
            }
            DatasetDescriptor::File { train, val, classes } => {
                let train = load_csv(train, *classes)?;
                let val = val
                    .as_ref()
                    .map(|p| load_csv(p, Some(classes.unwrap_or(train.classes()))))
                    .transpose()?;
                Ok((train, val))
            }
            DatasetDescriptor::Expanded {
                base,
                copies,
                augmentation,
            } => {
                let (train, val) = base.load()?;
                Ok((expand_fixed(&train, *copies, augmentation)?, val))
            }
        }
    }

    /// `(train size, feature dim, classes)` when known without reading files.
    pub fn static_shape(&self) -> Option<(usize, usize, usize)> {
        match self {
            DatasetDescriptor::Synthetic { n, dim, classes, .. } => Some((*n, *dim, *classes)),
            DatasetDescriptor::File { .. } => None,
            DatasetDescriptor::Expanded { base, copies, .. } => {
                base.static_shape().map(|(n, d, k)| (n * copies, d, k))
            }
        }
    }
}

/// A complete experiment description. Every field has a default, so `{}` is
/// a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub model: ModelSpec,
    pub loss: LossConfig,
    pub schedule: Schedule,
    pub clip: Option<ClipConfig>,
    pub reg: Option<RegConfig>,
    pub noise: NoiseConfig,
    pub optimizer: MomentumConfig,
    pub batch_plan: BatchPlan,
    /// Chunk size for gradient accumulation when no regularizer blocks are in play.
    pub accumulation_block: usize,
    pub dataset: DatasetDescriptor,
    pub eval_every: u64,
    pub run_seed: u64,
    pub snapshot_policy: SnapshotPolicy,
}

fn default_clip() -> Option<ClipConfig> {
    Some(ClipConfig::default())
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::new(vec![2, 64, 64, 2]),
            loss: LossConfig::default(),
            schedule: Schedule::default(),
            clip: default_clip(),
            reg: None,
            noise: NoiseConfig::default(),
            optimizer: MomentumConfig::default(),
            batch_plan: BatchPlan::full_batch(),
            accumulation_block: 128,
            dataset: DatasetDescriptor::default(),
            eval_every: 100,
            run_seed: 0,
            snapshot_policy: SnapshotPolicy::default(),
        }
    }
}

/// Seeds actually used by a run, each derived from `run_seed`, a fixed
/// per-purpose tag and the declared sub-seed. Dataset seeds are used as declared: the data is the
/// fixed problem, not part of the run's randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeeds {
    pub init: u64,
    pub plan: u64,
    pub noise: u64,
}

impl TrainConfig {
    pub fn seeds(&self) -> RunSeeds {
        RunSeeds {
            init: seed::mix(seed::mix(self.run_seed, 1), self.model.init_seed),
            plan: seed::mix(seed::mix(self.run_seed, 2), self.batch_plan.seed),
            noise: seed::mix(seed::mix(self.run_seed, 3), self.noise.seed),
        }
    }

    /// Every violated constraint, each addressed by its JSON path.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut bad = |path: &str, message: String| {
            issues.push(ValidationIssue {
                path: path.to_string(),
                message,
            })
        };

        let widths = &self.model.layer_widths;
        if widths.len() < 2 {
            bad("model.layer_widths", format!("needs at least 2 entries, got {}", widths.len()));
        }
        if widths.contains(&0) {
            bad("model.layer_widths", "entries must be positive".into());
        }
        if !(0.0..0.5).contains(&self.loss.label_smoothing) {
            bad("loss.label_smoothing", format!("must lie in [0, 0.5), got {}", self.loss.label_smoothing));
        }

        let s = &self.schedule;
        if !(s.peak_lr > 0.0 && s.peak_lr.is_finite()) {
            bad("schedule.peak_lr", format!("must be positive, got {}", s.peak_lr));
        }
        if s.anneal_horizon == 0 {
            bad("schedule.anneal_horizon", "must be positive".into());
        }
        if s.total_steps == 0 {
            bad("schedule.total_steps", "must be positive".into());
        }
        if s.warmup_steps >= s.total_steps {
            bad("schedule.warmup_steps", format!("must be below total_steps = {}", s.total_steps));
        }
        if s.total_steps > s.warmup_steps + s.anneal_horizon {
            bad(
                "schedule.total_steps",
                format!("must not exceed warmup_steps + anneal_horizon = {}", s.warmup_steps + s.anneal_horizon),
            );
        }

        if let Some(c) = &self.clip {
            if !(c.max_norm > 0.0 && c.max_norm.is_finite()) {
                bad("clip.max_norm", format!("must be positive, got {}", c.max_norm));
            }
            if !(c.fudge > 0.0 && c.fudge.is_finite()) {
                bad("clip.fudge", format!("must be positive, got {}", c.fudge));
            }
        }
        if let Some(r) = &self.reg {
            if !(r.alpha >= 0.0 && r.alpha.is_finite()) {
                bad("reg.alpha", format!("must be nonnegative, got {}", r.alpha));
            }
            if r.block_size == 0 {
                bad("reg.block_size", "must be positive".into());
            }
            if !(r.eps_numerator > 0.0 && r.eps_numerator.is_finite()) {
                bad("reg.eps_numerator", format!("must be positive, got {}", r.eps_numerator));
            }
            if !(r.zero_grad_guard > 0.0 && r.zero_grad_guard.is_finite()) {
                bad("reg.zero_grad_guard", format!("must be positive, got {}", r.zero_grad_guard));
            }
        }
        if !(self.noise.scale >= 0.0 && self.noise.scale.is_finite()) {
            bad("noise.scale", format!("must be nonnegative, got {}", self.noise.scale));
        }
        if !(0.0..1.0).contains(&self.optimizer.momentum) {
            bad("optimizer.momentum", format!("must lie in [0, 1), got {}", self.optimizer.momentum));
        }
        if !(self.optimizer.weight_decay >= 0.0 && self.optimizer.weight_decay.is_finite()) {
            bad("optimizer.weight_decay", format!("must be nonnegative, got {}", self.optimizer.weight_decay));
        }
        if self.batch_plan.batch_size == 0 {
            bad("batch_plan.batch_size", "must be positive".into());
        }
        if self.accumulation_block == 0 {
            bad("accumulation_block", "must be positive".into());
        }
        if self.eval_every == 0 {
            bad("eval_every", "must be positive".into());
        }

        validate_dataset(&self.dataset, "dataset", &mut bad);
        if let Some((n, dim, classes)) = self.dataset.static_shape() {
            if widths.len() >= 2 {
                if widths[0] != dim {
                    bad("model.layer_widths", format!("input width {} does not match dataset dim {dim}", widths[0]));
                }
                if *widths.last().unwrap() < classes {
                    bad(
                        "model.layer_widths",
                        format!("output width {} is below dataset classes {classes}", widths.last().unwrap()),
                    );
                }
            }
            if matches!(self.batch_plan.mode, BatchMode::WithoutReplacement | BatchMode::FixedOrder)
                && self.batch_plan.batch_size > n
            {
                bad("batch_plan.batch_size", format!("exceeds training set size {n}"));
            }
        }
        issues
    }

    pub fn validated(self) -> Result<Self> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: TrainConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(vec![ValidationIssue {
                path: if path == "." { "$".into() } else { path },
                message: e.into_inner().to_string(),
            }])
        })?;
        cfg.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn validate_dataset(d: &DatasetDescriptor, path: &str, bad: &mut impl FnMut(&str, String)) {
    match d {
        DatasetDescriptor::Synthetic {
            n,
            dim,
            classes,
            noise,
            ..
        } => {
            if *classes < 2 {
                bad(&format!("{path}.classes"), format!("must be at least 2, got {classes}"));
            }
            if n < classes {
                bad(&format!("{path}.n"), format!("must be at least classes = {classes}"));
            }
            if *dim < 2 {
                bad(&format!("{path}.dim"), format!("must be at least 2, got {dim}"));
            }
            if let Some(noise) = noise {
                if !(*noise >= 0.0 && noise.is_finite()) {
                    bad(&format!("{path}.noise"), format!("must be nonnegative, got {noise}"));
                }
            }
        }
        DatasetDescriptor::File { classes, .. } => {
            if *classes == Some(0) {
                bad(&format!("{path}.classes"), "must be positive".into());
            }
        }
        DatasetDescriptor::Expanded {
            base,
            copies,
            augmentation,
        } => {
            if *copies == 0 {
                bad(&format!("{path}.copies"), "must be at least 1".into());
            }
            if !(augmentation.magnitude >= 0.0 && augmentation.magnitude.is_finite()) {
                bad(
                    &format!("{path}.augmentation.magnitude"),
                    format!("must be nonnegative, got {}", augmentation.magnitude),
                );
            }
            validate_dataset(base, &format!("{path}.base"), bad);
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<TrainConfig> {
    TrainConfig::from_json(&std::fs::read_to_string(path)?)
}

pub fn write_config(cfg: &TrainConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, cfg.to_json() + "\n")?;
    Ok(())
}
