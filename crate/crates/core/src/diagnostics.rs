//! Read-only measurements on a fixed model: gradient diversity, gradient
//! error reports, filter-normalized 1-D loss slices and reproducibility of
//! repeated gradient evaluation.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{LossConfig, MlpObjective, ModelSpec, Objective, ParamVector, SegmentKind};
use crate::optim::{accumulate_full_with, chunk_indices, AccumulationConfig};
use crate::seed;
use crate::vecmath::{axpy, norm, norm_sq, scale, sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub delta_d: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// `Σ‖∇ℓᵢ‖² / (N²·‖∇L‖²)` over every example of `obj`.
pub fn gradient_diversity<O: Objective + ?Sized>(obj: &O, params: &[f64]) -> Result<DiversityReport> {
    let all = obj.all_indices();
    let n = all.len();
    let chunks = chunk_indices(&all, 64);
    let parts = chunks
        .par_iter()
        .map(|c| {
            let grads = obj.per_example_grads(params, c)?;
            let mut sum = vec![0.0; obj.param_count()];
            let mut sq = 0.0;
            for g in &grads {
                sq += norm_sq(&g.grad);
                axpy(1.0, &g.grad, &mut sum);
            }
            Ok((sq, sum))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut numerator = 0.0;
    let mut total = vec![0.0; obj.param_count()];
    for (sq, sum) in &parts {
        numerator += sq;
        axpy(1.0, sum, &mut total);
    }
    scale(1.0 / n as f64, &mut total);
    let mean_norm = norm(&total);
    if mean_norm == 0.0 {
        return Err(Error::ZeroGradient { norm: mean_norm });
    }
    let denominator = (n * n) as f64 * mean_norm * mean_norm;
    Ok(DiversityReport {
        delta_d: numerator / denominator,
        numerator,
        denominator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub total_error: f64,
    /// `None` when the reference gradient is zero.
    pub relative_error: Option<f64>,
}

pub fn noise_report(g_ref: &[f64], g_test: &[f64]) -> Result<NoiseReport> {
    if g_ref.len() != g_test.len() {
        return Err(Error::shape(format!(
            "gradient lengths differ: {} vs {}",
            g_ref.len(),
            g_test.len()
        )));
    }
    let total_error = norm(&sub(g_ref, g_test));
    let r = norm(g_ref);
    Ok(NoiseReport {
        total_error,
        relative_error: (r > 0.0).then(|| total_error / r),
    })
}

/// Mean pairwise error over `repeats` evaluations of the full gradient.
pub fn repro_error<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    repeats: usize,
    cfg: &AccumulationConfig,
) -> Result<NoiseReport> {
    if repeats < 2 {
        return Err(Error::config(format!("repeats must be at least 2, got {repeats}")));
    }
    let grads = (0..repeats)
        .map(|_| accumulate_full_with(obj, params, cfg).map(|r| r.grad))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    let mut rel = Some(0.0);
    let mut pairs = 0usize;
    for i in 0..repeats {
        for j in i + 1..repeats {
            let r = noise_report(&grads[i], &grads[j])?;
            total += r.total_error;
            rel = rel.zip(r.relative_error).map(|(a, b)| a + b);
            pairs += 1;
        }
    }
    Ok(NoiseReport {
        total_error: total / pairs as f64,
        relative_error: rel.map(|r| r / pairs as f64),
    })
}

/// Error of one accumulation pipeline against another, `reference` first.
pub fn compare_accumulation<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    reference: &AccumulationConfig,
    test: &AccumulationConfig,
) -> Result<NoiseReport> {
    let a = accumulate_full_with(obj, params, reference)?;
    let b = accumulate_full_with(obj, params, test)?;
    noise_report(&a.grad, &b.grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeProbe {
    pub direction_seed: u64,
    pub t_grid: Vec<f64>,
    pub losses: Vec<f64>,
    pub normalization: bool,
}

impl LandscapeProbe {
    pub fn loss_at(&self, t: f64) -> Option<f64> {
        self.t_grid.iter().position(|&x| x == t).map(|i| self.losses[i])
    }

    /// `L(h) + L(−h) − 2·L(0)`; needs all three points on the grid.
    pub fn curvature(&self, h: f64) -> Result<f64> {
        let get = |t: f64| {
            self.loss_at(t)
                .ok_or_else(|| Error::config(format!("t = {t} is not on the probe grid")))
        };
        Ok(get(h)? + get(-h)? - 2.0 * get(0.0)?)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "loss"])?;
        for (t, l) in self.t_grid.iter().zip(&self.losses) {
            w.write_record([format!("{t:?}"), format!("{l:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Curvature proxy used for flatness comparisons.
pub fn curvature_proxy(probe: &LandscapeProbe) -> Result<f64> {
    probe.curvature(0.5)
}

/// Evenly spaced grid on `[-radius, radius]` with `2·half + 1` points; the
/// middle point is exactly zero.
pub fn symmetric_grid(radius: f64, half: usize) -> Vec<f64> {
    let h = half as f64;
    (0..=2 * half).map(|i| radius * (i as f64 - h) / h).collect()
}

/// Standard normal direction rescaled so that every weight row and every
/// bias vector has the norm of the matching parameter piece.
pub fn filter_normalized_direction(params: &ParamVector, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    let mut d: Vec<f64> = (0..params.len()).map(|_| rng.sample(StandardNormal)).collect();
    let theta = params.values();
    for s in params.segments() {
        let units: Vec<std::ops::Range<usize>> = match s.kind {
            SegmentKind::Weight => (0..s.rows)
                .map(|r| s.offset + r * s.cols..s.offset + (r + 1) * s.cols)
                .collect(),
            SegmentKind::Bias => vec![s.range()],
        };
        for u in units {
            let target = norm(&theta[u.clone()]);
            let piece = &mut d[u];
            let current = norm(piece);
            if target == 0.0 || current == 0.0 {
                piece.fill(0.0);
            } else {
                let f = target / current;
                piece.iter_mut().for_each(|x| *x *= f);
            }
        }
    }
    d
}

/// Loss along `θ + t·d` for a filter-normalized random `d`. `params` is only
/// read; the `t = 0` entry is the loss at `params` itself.
pub fn landscape_1d_with<O: Objective + ?Sized>(
    obj: &O,
    params: &ParamVector,
    direction_seed: u64,
    t_grid: &[f64],
) -> Result<LandscapeProbe> {
    if !t_grid.contains(&0.0) {
        return Err(Error::config("t_grid must contain 0"));
    }
    let d = filter_normalized_direction(params, direction_seed);
    let all = obj.all_indices();
    let losses = t_grid
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return obj.loss(params.values(), &all);
            }
            let mut p = params.values().to_vec();
            axpy(t, &d, &mut p);
            obj.loss(&p, &all)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeProbe {
        direction_seed,
        t_grid: t_grid.to_vec(),
        losses,
        normalization: true,
    })
}

pub fn landscape_1d(
    params: &ParamVector,
    spec: &ModelSpec,
    ds: &Dataset,
    loss: LossConfig,
    direction_seed: u64,
    t_grid: &[f64],
) -> Result<LandscapeProbe> {
    let obj = MlpObjective::new(spec, ds, loss)?;
    landscape_1d_with(&obj, params, direction_seed, t_grid)
}
