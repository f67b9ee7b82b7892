use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{expand_fixed, load_csv, write_csv, AugmentationKind, AugmentationSpec};
use crate::diagnostics::{
    gradient_diversity, landscape_1d_with, noise_report, repro_error, symmetric_grid, NoiseReport,
};
use crate::error::{Error, Result};
use crate::harness::{
    load_checkpoint, load_config, preset, save_checkpoint, write_config, write_run_summary, Preset,
    TrainConfig, summarize_dirs,
};
use crate::model::{MlpObjective, Objective};
use crate::optim::{train, AccumulationConfig};
use crate::seed;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "FBLAB_OUT";

#[derive(Parser, Debug)]
#[command(name = "fblab", version, about = "Full-batch training experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one run and write its artifacts.
    Train(TrainArgs),
    /// Write a fixed augmented expansion of a CSV dataset.
    Expand(ExpandArgs),
    /// Measure a checkpoint: landscape slice, gradient diversity, gradient noise.
    Probe(ProbeArgs),
    /// Aggregate several run directories into mean and sample std.
    Summarize(SummarizeArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
struct ConfigSource {
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
    #[arg(long, group = "source")]
    preset: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Overrides `run_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory. Defaults to `$FBLAB_OUT/<name>_seed<S>` (or `./runs/...`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AugArg {
    GaussianJitter,
    PixelShiftFlip,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    copies: usize,
    #[arg(long, value_enum, default_value = "gaussian-jitter")]
    augmentation: AugArg,
    #[arg(long, default_value_t = 0.05)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Image grid `HxW` for pixel augmentations.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    classes: Option<usize>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Config whose dataset is probed. Defaults to `config.json` next to the checkpoint.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    landscape: bool,
    #[arg(long)]
    diversity: bool,
    #[arg(long)]
    noise: bool,
    #[arg(long, default_value_t = 0)]
    direction_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Grid points on each side of zero.
    #[arg(long, default_value_t = 10)]
    half_points: usize,
    #[arg(long, default_value_t = 128)]
    block_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Summarize(a) => summarize_dirs(&a.runs, &a.out).map(|_| ()),
    };
    match res {
        Ok(()) => 0,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn resolve(config: Option<&Path>, preset_name: Option<&str>) -> Result<(String, TrainConfig)> {
    match (config, preset_name) {
        (Some(p), None) => {
            let name = p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            Ok((name, load_config(p)?))
        }
        (None, Some(n)) => {
            let p: Preset = n.parse()?;
            Ok((p.name().to_string(), preset(p)))
        }
        _ => Err(Error::Usage("give exactly one of --config or --preset".into())),
    }
}

fn default_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let (name, mut cfg) = resolve(a.source.config.as_deref(), a.source.preset.as_deref())?;
    if let Some(s) = a.seed {
        cfg.run_seed = s;
    }
    let out = a
        .out
        .unwrap_or_else(|| default_root().join(format!("{name}_seed{}", cfg.run_seed)));
    run_to_dir(&cfg, &out)
}

/// Trains `cfg` and writes every run artifact under `out`.
pub fn run_to_dir(cfg: &TrainConfig, out: &Path) -> Result<()> {
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    fs::create_dir_all(out)?;
    write_config(cfg, out.join("config.json"))?;
    let (train_ds, val_ds) = cfg.dataset.load()?;
    let log = train(cfg, &train_ds, val_ds.as_ref())?;
    log.write_steps_csv(out.join("runlog.csv"))?;
    log.write_validation_csv(out.join("validation.csv"))?;
    write_run_summary(&log.summary, out.join("summary.json"))?;
    if let Some(p) = &log.last {
        save_checkpoint(out.join("last.bin"), &cfg.model, p)?;
    }
    if let Some(p) = &log.best {
        save_checkpoint(out.join("best.bin"), &cfg.model, p)?;
    }
    if let Some(ab) = &log.summary.abort {
        eprintln!("run aborted at step {}: {}", ab.step, ab.cause);
    }
    Ok(())
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("grid must look like 8x8, got {s:?}"));
    let (h, w) = s.split_once('x').ok_or_else(bad)?;
    Ok((h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?))
}

fn cmd_expand(a: ExpandArgs) -> Result<()> {
    let mut ds = load_csv(&a.input, a.classes)?;
    if let Some(g) = &a.grid {
        let (h, w) = parse_grid(g)?;
        ds = ds.with_grid(h, w)?;
    }
    let aug = AugmentationSpec {
        kind: match a.augmentation {
            AugArg::GaussianJitter => AugmentationKind::GaussianJitter,
            AugArg::PixelShiftFlip => AugmentationKind::PixelShiftFlip,
        },
        magnitude: a.magnitude,
        seed: a.seed,
    };
    let big = expand_fixed(&ds, a.copies, &aug)?;
    write_csv(&big, &a.out)
}

#[derive(Serialize)]
struct NoiseOutput {
    block_vs_full: NoiseReport,
    repeated_full: NoiseReport,
    block_size: usize,
}

fn cmd_probe(a: ProbeArgs) -> Result<()> {
    if !(a.landscape || a.diversity || a.noise) {
        return Err(Error::Usage("pick at least one of --landscape, --diversity, --noise".into()));
    }
    let (spec, params) = load_checkpoint(&a.checkpoint)?;
    let cfg = match (&a.config, &a.preset) {
        (None, None) => {
            let dir = a.checkpoint.parent().unwrap_or(Path::new("."));
            load_config(dir.join("config.json"))?
        }
        (c, p) => resolve(c.as_deref(), p.as_deref())?.1,
    };
    let (train_ds, _) = cfg.dataset.load()?;
    let obj = MlpObjective::new(&spec, &train_ds, cfg.loss)?;
    fs::create_dir_all(&a.out)?;

    if a.landscape {
        let grid = symmetric_grid(a.radius, a.half_points);
        let probe = landscape_1d_with(&obj, &params, a.direction_seed, &grid)?;
        probe.write_csv(a.out.join("landscape.csv"))?;
    }
    if a.diversity {
        let rep = gradient_diversity(&obj, params.values())?;
        fs::write(a.out.join("diversity.json"), serde_json::to_string_pretty(&rep)?)?;
    }
    if a.noise {
        let theta = params.values();
        let full = obj.grad(theta, &obj.all_indices())?;
        let n = obj.example_count();
        let bs = a.block_size.min(n).max(1);
        let mut idx: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut seed::rng(a.seed));
        idx.truncate(bs);
        let block = obj.grad(theta, &idx)?;
        let out = NoiseOutput {
            block_vs_full: noise_report(&full.grad, &block.grad)?,
            repeated_full: repro_error(&obj, theta, 3, &AccumulationConfig::new(cfg.accumulation_block))?,
            block_size: bs,
        };
        fs::write(a.out.join("noise.json"), serde_json::to_string_pretty(&out)?)?;
    }
    Ok(())
}
