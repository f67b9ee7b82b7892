//! Update machinery: streaming full-dataset accumulation, global clipping,
//! warmup + cosine schedules, Nesterov momentum with weight decay, gradient
//! noise injection, and the training loop that ties them together.

mod accumulate;
mod clip;
mod momentum;
mod noise;
mod schedule;
mod train;

pub use accumulate::{
    accumulate_blocks, accumulate_full, accumulate_full_with, chunk_indices, contiguous_blocks, AccumulationConfig,
    Precision, StreamingMean,
};
pub use clip::{clip_global, clip_in_place, ClipConfig};
pub use momentum::{nesterov_update, MomentumConfig, MomentumState};
pub use noise::{inject_noise, NoiseConfig, NoiseMode};
pub use schedule::{lr_at, Schedule};
pub use train::{optimize, train, train_with};
