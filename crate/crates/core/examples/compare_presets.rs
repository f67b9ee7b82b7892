//! Seed sweep over presets: median final validation accuracy and curvature.
//!
//!     cargo run --release --example compare_presets -- baseline_sgd fb_base fb_strong

use fblab::diagnostics::{curvature_proxy, landscape_1d, symmetric_grid};
use fblab::harness::{preset, Preset};
use fblab::optim::train;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut presets: Vec<Preset> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if presets.is_empty() {
        presets = vec![Preset::BaselineSgd, Preset::FbBase, Preset::FbClip, Preset::FbStrong];
    }
    let seeds = 0..5u64;
    println!("{:<24} {:>9} {:>9} {:>10}", "preset", "train acc", "val acc", "curvature");
    for p in presets {
        let (mut tr_acc, mut val_acc, mut curv) = (vec![], vec![], vec![]);
        for seed in seeds.clone() {
            let mut cfg = preset(p);
            cfg.run_seed = seed;
            let (tr, val) = cfg.dataset.load()?;
            let log = train(&cfg, &tr, val.as_ref())?;
            let s = &log.summary;
            tr_acc.push(s.final_train_acc.unwrap_or(f64::NAN));
            val_acc.push(s.final_val_acc.unwrap_or(f64::NAN));
            if let Some(last) = &log.last {
                let probe = landscape_1d(last, &cfg.model, &tr, cfg.loss, 7, &symmetric_grid(0.5, 1))?;
                curv.push(curvature_proxy(&probe)?);
            }
        }
        println!("{:<24} {:>9.4} {:>9.4} {:>10.4}", p.to_string(), median(tr_acc), median(val_acc), median(curv));
    }
    Ok(())
}
