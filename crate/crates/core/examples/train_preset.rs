//! Train one named preset and write the run directory.
//!
//!     cargo run --release --example train_preset -- fb_strong 3 runs/fb_strong_seed3

use std::path::PathBuf;

use fblab::harness::{preset, read_run_summary, run_to_dir, Preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: Preset = args.next().as_deref().unwrap_or("fb_clip").parse()?;
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("fblab_{p}_seed{seed}")));

    let mut cfg = preset(p);
    cfg.run_seed = seed;
    println!(
        "{p}: {} steps, peak lr {}, batch {:?}/{}, clip {:?}, reg {:?}",
        cfg.schedule.total_steps,
        cfg.schedule.peak_lr,
        cfg.batch_plan.mode,
        cfg.batch_plan.batch_size,
        cfg.clip.map(|c| c.max_norm),
        cfg.reg.map(|r| (r.alpha, r.block_size)),
    );
    run_to_dir(&cfg, &out)?;

    let s = read_run_summary(out.join("summary.json"))?;
    println!("wrote {}", out.display());
    println!(
        "train acc {:.4}  val acc {:.4}  best val {:.4} at step {:?}  clipped steps {}",
        s.final_train_acc.unwrap_or(f64::NAN),
        s.final_val_acc.unwrap_or(f64::NAN),
        s.best_val_acc.unwrap_or(f64::NAN),
        s.best_val_step,
        s.clipped_steps
    );
    if let Some(a) = s.abort {
        println!("aborted at step {}: {}", a.step, a.cause);
    }
    Ok(())
}
