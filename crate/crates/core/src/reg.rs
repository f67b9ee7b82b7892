//! Explicit gradient-norm penalty standing in for the implicit bias of
//! mini-batch SGD.
//!
//! For a set of fixed blocks `𝓑` the penalty is
//!
//! ```text
//! P(θ) = (α·τ_k / 4) · R(θ),     R(θ) = (1/|𝓑|) Σ_B ‖g_B(θ)‖²
//! ```
//!
//! where `g_B` is the mean gradient over block `B` and `τ_k` the current
//! learning rate. Since `∇‖g_B‖² = 2·H_B g_B`, the gradient of `P` is
//! `(α·τ_k / 2) · (1/|𝓑|) Σ_B H_B g_B`, and each Hessian-vector product is
//! replaced by a difference of two gradients along `g_B` with step
//! `ε = eps_numerator / ‖g_B‖`.
//!
//! [`sam_grad`] is the sharpness-aware gradient; with `ε = ρ/‖g‖` the
//! forward-difference penalty gradient interpolates between the plain and the
//! sharpness-aware gradient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hessian_oracle, GradReport, Objective};
use crate::vecmath::{axpy, norm, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiffMode {
    /// `(∇L(θ + ε g) − ∇L(θ)) / ε`
    #[default]
    Forward,
    /// `(∇L(θ + ε g) − ∇L(θ − ε g)) / 2ε`
    Central,
    /// Dense finite-difference Hessian times `g` (tiny models only).
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegConfig {
    pub alpha: f64,
    pub block_size: usize,
    pub eps_numerator: f64,
    pub diff_mode: DiffMode,
    pub zero_grad_guard: f64,
}

impl Default for RegConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            block_size: 128,
            eps_numerator: 0.01,
            diff_mode: DiffMode::Forward,
            zero_grad_guard: 1e-12,
        }
    }
}

impl RegConfig {
    /// `α·τ / 4`, the factor in front of the mean squared block-gradient norm.
    pub fn coefficient(&self, tau: f64) -> f64 {
        self.alpha * tau / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamConfig {
    pub rho: f64,
}

impl Default for SamConfig {
    fn default() -> Self {
        Self { rho: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyReport {
    /// Unscaled `R(θ)`: mean over blocks of `‖g_B‖²`.
    pub value: f64,
    /// Gradient of `coefficient · R(θ)`.
    pub grad: Vec<f64>,
    pub coefficient: f64,
    pub blocks_used: usize,
    pub blocks_skipped_zero_grad: usize,
}

/// One block's contribution: an approximation of `H_B g_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRegGrad {
    pub grad: Vec<f64>,
    /// The block gradient was below the zero guard; `grad` is all zeros.
    pub skipped: bool,
}

fn check_blocks(blocks: &[Vec<usize>]) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::config("no blocks given"));
    }
    if let Some(i) = blocks.iter().position(Vec::is_empty) {
        return Err(Error::config(format!("block {i} is empty")));
    }
    Ok(())
}

/// `R(θ) = (1/|𝓑|) Σ_B ‖g_B‖²`, unscaled.
pub fn penalty_value<O: Objective + ?Sized>(obj: &O, params: &[f64], blocks: &[Vec<usize>]) -> Result<f64> {
    check_blocks(blocks)?;
    let grads = block_grads(obj, params, blocks)?;
    Ok(mean_sq_norm(&grads))
}

fn mean_sq_norm(grads: &[GradReport]) -> f64 {
    grads.iter().map(|g| norm_sq(&g.grad)).sum::<f64>() / grads.len() as f64
}

/// Mean gradients of every block, computed in parallel and returned in block order.
pub fn block_grads<O: Objective + ?Sized>(obj: &O, params: &[f64], blocks: &[Vec<usize>]) -> Result<Vec<GradReport>> {
    blocks.par_iter().map(|b| obj.grad(params, b)).collect()
}

/// Finite-difference step `eps_numerator / ‖g‖`, or `None` when `‖g‖` is at
/// or below the zero guard (the caller then skips the block).
pub fn epsilon_for(g: &[f64], cfg: &RegConfig) -> Option<f64> {
    let n = norm(g);
    (n > cfg.zero_grad_guard).then(|| cfg.eps_numerator / n)
}

/// Approximates `∇ ½‖g_B‖² = H_B g_B` for one block.
pub fn reg_grad_block<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    block: &[usize],
    cfg: &RegConfig,
) -> Result<BlockRegGrad> {
    let g = obj.grad(params, block)?;
    reg_grad_block_at(obj, params, block, &g.grad, cfg)
}

/// As [`reg_grad_block`] with the block gradient `g_block` already known.
///
/// Perturbed points are built in a private copy; `params` is never touched.
pub fn reg_grad_block_at<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    block: &[usize],
    g_block: &[f64],
    cfg: &RegConfig,
) -> Result<BlockRegGrad> {
    if block.is_empty() {
        return Err(Error::config("empty block"));
    }
    let Some(eps) = epsilon_for(g_block, cfg) else {
        return Ok(BlockRegGrad {
            grad: vec![0.0; params.len()],
            skipped: true,
        });
    };
    let grad = match cfg.diff_mode {
        DiffMode::Forward => {
            let mut shifted = params.to_vec();
            axpy(eps, g_block, &mut shifted);
            let plus = obj.grad(&shifted, block)?.grad;
            plus.iter().zip(g_block).map(|(a, b)| (a - b) / eps).collect()
        }
        DiffMode::Central => {
            let mut shifted = params.to_vec();
            axpy(eps, g_block, &mut shifted);
            let plus = obj.grad(&shifted, block)?.grad;
            shifted.copy_from_slice(params);
            axpy(-eps, g_block, &mut shifted);
            let minus = obj.grad(&shifted, block)?.grad;
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect()
        }
        DiffMode::Oracle => hessian_oracle(obj, params, block)?.matvec(g_block),
    };
    Ok(BlockRegGrad { grad, skipped: false })
}

/// Value and gradient of the coefficient-scaled penalty at learning rate `tau`.
pub fn penalty_grad<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    blocks: &[Vec<usize>],
    cfg: &RegConfig,
    tau: f64,
) -> Result<PenaltyReport> {
    check_blocks(blocks)?;
    let grads = block_grads(obj, params, blocks)?;
    penalty_grad_with(obj, params, blocks, &grads, cfg, tau)
}

/// As [`penalty_grad`], reusing block gradients the caller already has
/// (`block_grads[i]` must be the mean gradient over `blocks[i]` at `params`).
pub fn penalty_grad_with<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    blocks: &[Vec<usize>],
    block_grads: &[GradReport],
    cfg: &RegConfig,
    tau: f64,
) -> Result<PenaltyReport> {
    check_blocks(blocks)?;
    if blocks.len() != block_grads.len() {
        return Err(Error::shape(format!(
            "{} blocks but {} block gradients",
            blocks.len(),
            block_grads.len()
        )));
    }
    let value = mean_sq_norm(block_grads);
    let coefficient = cfg.coefficient(tau);
    let skipped = block_grads
        .iter()
        .filter(|g| epsilon_for(&g.grad, cfg).is_none())
        .count();
    let mut grad = vec![0.0; params.len()];

    if coefficient != 0.0 {
        let parts: Vec<BlockRegGrad> = blocks
            .par_iter()
            .zip(block_grads.par_iter())
            .map(|(b, g)| reg_grad_block_at(obj, params, b, &g.grad, cfg))
            .collect::<Result<_>>()?;
        // fixed-order reduction
        for part in &parts {
            axpy(1.0, &part.grad, &mut grad);
        }
        let scale = 2.0 * coefficient / blocks.len() as f64;
        for v in &mut grad {
            *v *= scale;
        }
    }

    Ok(PenaltyReport {
        value,
        grad,
        coefficient,
        blocks_used: blocks.len() - skipped,
        blocks_skipped_zero_grad: skipped,
    })
}

/// Gradient at the adversarially ascended point `θ + (ρ/‖g‖)·g`.
///
/// Falls back to the plain gradient when `‖g‖` is zero, where the ascent
/// direction is undefined.
pub fn sam_grad<O: Objective + ?Sized>(obj: &O, params: &[f64], block: &[usize], cfg: &SamConfig) -> Result<Vec<f64>> {
    if !(cfg.rho > 0.0 && cfg.rho.is_finite()) {
        return Err(Error::config(format!("rho must be positive, got {}", cfg.rho)));
    }
    let g = obj.grad(params, block)?.grad;
    let n = norm(&g);
    if n == 0.0 {
        return Ok(g);
    }
    let mut shifted = params.to_vec();
    axpy(cfg.rho / n, &g, &mut shifted);
    Ok(obj.grad(&shifted, block)?.grad)
}
