//! Train a preset, then trace the loss along a filter-normalized random
//! direction and write it as CSV.
//!
//!     cargo run --release --example landscape_probe -- fb_long landscape.csv

use fblab::diagnostics::{curvature_proxy, landscape_1d, symmetric_grid};
use fblab::harness::{preset, Preset};
use fblab::optim::train;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: Preset = args.next().as_deref().unwrap_or("fb_clip").parse()?;
    let csv = args
        .next()
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("fblab_landscape_{p}.csv")));

    let cfg = preset(p);
    let (tr, val) = cfg.dataset.load()?;
    let log = train(&cfg, &tr, val.as_ref())?;
    let theta = log.last.expect("last snapshot");
    let probe = landscape_1d(&theta, &cfg.model, &tr, cfg.loss, 7, &symmetric_grid(1.0, 10))?;
    for (t, l) in probe.t_grid.iter().zip(&probe.losses) {
        let bar = "#".repeat(((l / probe.losses.iter().cloned().fold(0.0, f64::max)) * 50.0) as usize);
        println!("{t:>5.2} {l:>9.4} {bar}");
    }
    println!("{p}: curvature proxy {:.4}", curvature_proxy(&probe)?);
    probe.write_csv(&csv)?;
    println!("wrote {}", csv.display());
    Ok(())
}
