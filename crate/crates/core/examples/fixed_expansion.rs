//! Grow a small training set into a fixed larger one and train on both.

use fblab::data::{expand_fixed, make_synthetic, AugmentationKind, AugmentationSpec, SyntheticKind};
use fblab::harness::{preset, Preset};
use fblab::optim::train;

fn main() -> fblab::Result<()> {
    let small = make_synthetic(SyntheticKind::Spirals, 200, 2, 2, 1)?;
    let val = make_synthetic(SyntheticKind::Spirals, 1000, 2, 2, 2)?;
    let aug = AugmentationSpec {
        kind: AugmentationKind::GaussianJitter,
        magnitude: 0.05,
        seed: 9,
    };
    let big = expand_fixed(&small, 10, &aug)?;
    assert_eq!(big.to_bytes(), expand_fixed(&small, 10, &aug)?.to_bytes());
    println!("{} examples expanded to {} ({:?})", small.len(), big.len(), big.provenance());

    let cfg = preset(Preset::FbClip);
    for (name, ds) in [("original", &small), ("expanded", &big)] {
        let log = train(&cfg, ds, Some(&val))?;
        let s = &log.summary;
        println!(
            "{name:>8}: train acc {:.4}, val acc {:.4}",
            s.final_train_acc.unwrap_or(f64::NAN),
            s.final_val_acc.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
