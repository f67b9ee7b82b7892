use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GradReport, Objective};

/// Count-weighted streaming mean, `m ← m + (x·w − m·w) / W` with `W` the
/// running total weight. Partial results stay at the scale of the mean rather
/// than growing with the number of chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamingMean {
    mean: Vec<f64>,
    weight: f64,
}

impl StreamingMean {
    pub fn new(len: usize) -> Self {
        Self {
            mean: vec![0.0; len],
            weight: 0.0,
        }
    }

    pub fn push(&mut self, value: &[f64], weight: f64) {
        debug_assert_eq!(value.len(), self.mean.len());
        self.weight += weight;
        let total = self.weight;
        for (m, &x) in self.mean.iter_mut().zip(value) {
            *m += (x * weight - *m * weight) / total;
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn into_mean(self) -> Vec<f64> {
        self.mean
    }
}

/// Same update in single precision, for reproducibility measurements.
#[derive(Debug, Clone)]
struct StreamingMean32 {
    mean: Vec<f32>,
    weight: f32,
}

impl StreamingMean32 {
    fn push(&mut self, value: &[f64], weight: f32) {
        self.weight += weight;
        let total = self.weight;
        for (m, &x) in self.mean.iter_mut().zip(value) {
            let x = x as f32;
            *m += (x * weight - *m * weight) / total;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    F64,
    /// Block gradients rounded to `f32` and averaged in `f32`.
    F32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulationConfig {
    pub block_size: usize,
    pub precision: Precision,
}

impl AccumulationConfig {
    pub fn new(block_size: usize) -> Self {
        Self {
            block_size,
            precision: Precision::F64,
        }
    }
}

/// Consecutive index blocks of `block_size` covering `0..n`.
pub fn contiguous_blocks(n: usize, block_size: usize) -> Vec<Vec<usize>> {
    chunk_indices(&(0..n).collect::<Vec<_>>(), block_size)
}

pub fn chunk_indices(indices: &[usize], block_size: usize) -> Vec<Vec<usize>> {
    indices.chunks(block_size.max(1)).map(<[usize]>::to_vec).collect()
}

/// Mean gradient and loss over `blocks`, weighted by block size.
///
/// Block gradients may be computed on any number of workers; the reduction
/// always runs sequentially in block order, so the result does not depend on
/// the thread count. Also returns the per-block reports.
pub fn accumulate_blocks<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    blocks: &[Vec<usize>],
) -> Result<(GradReport, Vec<GradReport>)> {
    if blocks.is_empty() {
        return Err(Error::config("nothing to accumulate"));
    }
    let parts: Vec<GradReport> = blocks.par_iter().map(|b| obj.grad(params, b)).collect::<Result<_>>()?;
    let mut grad = StreamingMean::new(obj.param_count());
    let mut loss = StreamingMean::new(1);
    let mut count = 0;
    for part in &parts {
        let w = part.count as f64;
        grad.push(&part.grad, w);
        loss.push(&[part.loss], w);
        count += part.count;
    }
    Ok((
        GradReport {
            grad: grad.into_mean(),
            loss: loss.mean()[0],
            count,
        },
        parts,
    ))
}

/// Exact full-dataset gradient, accumulated over consecutive blocks of `block_size`.
pub fn accumulate_full<O: Objective + ?Sized>(obj: &O, params: &[f64], block_size: usize) -> Result<GradReport> {
    accumulate_full_with(obj, params, &AccumulationConfig::new(block_size))
}

pub fn accumulate_full_with<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    cfg: &AccumulationConfig,
) -> Result<GradReport> {
    if cfg.block_size == 0 {
        return Err(Error::config("accumulation block_size must be at least 1"));
    }
    let blocks = contiguous_blocks(obj.example_count(), cfg.block_size);
    match cfg.precision {
        Precision::F64 => Ok(accumulate_blocks(obj, params, &blocks)?.0),
        Precision::F32 => {
            let parts: Vec<GradReport> = blocks.par_iter().map(|b| obj.grad(params, b)).collect::<Result<_>>()?;
            let mut grad = StreamingMean32 {
                mean: vec![0.0; obj.param_count()],
                weight: 0.0,
            };
            let mut loss = StreamingMean32 {
                mean: vec![0.0],
                weight: 0.0,
            };
            for part in &parts {
                grad.push(&part.grad, part.count as f32);
                loss.push(&[part.loss], part.count as f32);
            }
            Ok(GradReport {
                grad: grad.mean.iter().map(|&x| f64::from(x)).collect(),
                loss: f64::from(loss.mean[0]),
                count: obj.example_count(),
            })
        }
    }
}
