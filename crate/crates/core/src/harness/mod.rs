//! Experiment configuration, presets, run artifacts and the command line.

mod checkpoint;
mod cli;
mod config;
mod presets;
mod runlog;
mod summarize;

pub use checkpoint::{load_checkpoint, save_checkpoint, sidecar_path, CheckpointMeta, CHECKPOINT_FORMAT_VERSION};
pub use cli::{run_cli, run_to_dir, OUT_ENV};
pub use config::{load_config, write_config, DatasetDescriptor, RunSeeds, SnapshotPolicy, TrainConfig};
pub use presets::{preset, Preset, DESK_EPOCHS, DESK_TRAIN_SIZE, LONG_STEPS, REG_BLOCK, SGD_BATCH};
pub use runlog::{read_steps_csv, read_validation_csv, Abort, RunLog, RunSummary, StepRecord, ValRecord};
pub use summarize::{
    aggregate, read_run_summary, summarize_dirs, write_run_summary, Aggregate, MetricStats, RunMetadata,
    RunSummaryFile,
};
