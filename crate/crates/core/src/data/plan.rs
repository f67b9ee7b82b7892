use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    /// One block per epoch: every index, in order.
    FullBatch,
    /// A fresh permutation each epoch, cut into consecutive blocks.
    WithoutReplacement,
    /// `ceil(n / batch_size)` blocks per epoch, each drawn uniformly with replacement.
    WithReplacement,
    /// One permutation drawn from the plan seed and reused for every epoch.
    FixedOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchPlan {
    pub mode: BatchMode,
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl BatchPlan {
    pub fn full_batch() -> Self {
        Self {
            mode: BatchMode::FullBatch,
            batch_size: 128,
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::config("cannot plan batches over an empty dataset"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if matches!(self.mode, BatchMode::WithoutReplacement | BatchMode::FixedOrder) && self.batch_size > n {
            return Err(Error::config(format!(
                "batch_size {} exceeds dataset size {n}",
                self.batch_size
            )));
        }
        Ok(())
    }

    /// Number of blocks per epoch.
    pub fn blocks_per_epoch(&self, n: usize) -> usize {
        match self.mode {
            BatchMode::FullBatch => 1,
            _ => n.div_ceil(self.batch_size),
        }
    }
}

/// Blocks for one epoch; a pure function of `(plan, n, epoch)`, so any epoch
/// can be regenerated without replaying earlier ones.
pub fn plan_epoch(plan: &BatchPlan, n: usize, epoch: u64) -> Result<Vec<Vec<usize>>> {
    plan.validate(n)?;
    let blocks = match plan.mode {
        BatchMode::FullBatch => vec![(0..n).collect()],
        BatchMode::WithoutReplacement => chunk(permutation(n, seed::mix(plan.seed, epoch)), plan.batch_size),
        BatchMode::FixedOrder => chunk(permutation(n, plan.seed), plan.batch_size),
        BatchMode::WithReplacement => {
            let mut rng = seed::rng(seed::mix(plan.seed, epoch));
            (0..plan.blocks_per_epoch(n))
                .map(|_| (0..plan.batch_size).map(|_| rng.random_range(0..n)).collect())
                .collect()
        }
    };
    Ok(blocks)
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed));
    idx
}

fn chunk(idx: Vec<usize>, size: usize) -> Vec<Vec<usize>> {
    idx.chunks(size).map(<[usize]>::to_vec).collect()
}
