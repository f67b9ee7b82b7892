//! A desk-scale laboratory for full-batch gradient descent.
//!
//! The crate reproduces the ingredients that let non-stochastic, full-dataset
//! gradient descent reach the generalization of mini-batch SGD:
//!
//! - exact full-dataset gradients accumulated with a streaming, count-weighted mean
//!   ([`optim::accumulate_full`]),
//! - global ℓ² clipping of the accumulated gradient ([`optim::clip_global`]),
//! - long warmup + cosine schedules ([`optim::lr_at`]),
//! - an explicit per-block gradient-norm penalty whose gradient is taken by finite
//!   differences of gradients ([`reg::penalty_grad`]),
//!
//! together with the diagnostics used to study the effect: gradient diversity,
//! gradient-noise reports, filter-normalized loss slices and reproducibility error
//! ([`diagnostics`]).
//!
//! Models are small multi-layer perceptrons with hand-written backpropagation
//! ([`model::Mlp`]); everything runs in `f64`.
//!
//! Runnable walkthroughs live in `crates/core/examples/`, one per capability.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod model;
pub mod optim;
pub mod reg;
pub mod seed;
pub mod vecmath;

pub use error::{Error, Result};
