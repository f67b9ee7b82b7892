//! Gradient diversity and the noise between block, full-batch and repeated
//! full-batch gradients, at initialization and after training.

use fblab::diagnostics::{compare_accumulation, gradient_diversity, noise_report, repro_error};
use fblab::harness::{preset, Preset};
use fblab::model::{init_model, MlpObjective, ModelSpec, Objective};
use fblab::optim::{train, AccumulationConfig, Precision};

fn report(label: &str, obj: &MlpObjective<'_>, theta: &[f64]) -> fblab::Result<()> {
    let d = gradient_diversity(obj, theta)?;
    let full = obj.grad(theta, &obj.all_indices())?.grad;
    let block = obj.grad(theta, &(0..32).collect::<Vec<_>>())?.grad;
    let b = noise_report(&full, &block)?;
    let repro = repro_error(obj, theta, 3, &AccumulationConfig::new(128))?;
    let fp = compare_accumulation(
        obj,
        theta,
        &AccumulationConfig::new(128),
        &AccumulationConfig { block_size: 128, precision: Precision::F32 },
    )?;
    println!("{label}");
    println!("  diversity Δ_D = {:.4e}", d.delta_d);
    println!("  32-example block vs full: {:.4e} (relative {:.3})", b.total_error, b.relative_error.unwrap_or(f64::NAN));
    println!("  repeated full batch: {:.1e}", repro.total_error);
    println!("  f32 vs f64 accumulation: relative {:.2e}", fp.relative_error.unwrap_or(f64::NAN));
    Ok(())
}

fn main() -> fblab::Result<()> {
    let cfg = preset(Preset::FbClip);
    let (tr, val) = cfg.dataset.load()?;
    let spec = ModelSpec { init_seed: cfg.seeds().init, ..cfg.model.clone() };
    let obj = MlpObjective::new(&spec, &tr, cfg.loss)?;
    report("at initialization", &obj, init_model(&spec)?.values())?;

    let log = train(&cfg, &tr, val.as_ref())?;
    let last = log.last.expect("fb_clip keeps the last snapshot");
    report("after fb_clip", &obj, last.values())
}
