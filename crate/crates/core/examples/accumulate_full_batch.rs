//! Streaming full-batch gradients: the result does not depend on the chunk
//! size, and the online mean holds up where a naive sum loses digits.

use fblab::data::{make_synthetic, SyntheticKind};
use fblab::model::{init_model, LossConfig, MlpObjective, ModelSpec, Objective};
use fblab::optim::{accumulate_full, accumulate_full_with, AccumulationConfig, Precision, StreamingMean};
use fblab::vecmath::rel_err;

fn main() -> fblab::Result<()> {
    let ds = make_synthetic(SyntheticKind::Spirals, 1000, 2, 2, 1)?;
    let spec = ModelSpec::new(vec![2, 64, 64, 2]).with_seed(3);
    let obj = MlpObjective::new(&spec, &ds, LossConfig::default())?;
    let params = init_model(&spec)?;
    let theta = params.values();

    let reference = obj.grad(theta, &obj.all_indices())?;
    println!("{} parameters, loss {:.6}", theta.len(), reference.loss);
    for bs in [1, 7, 32, 128, 1000] {
        let g = accumulate_full(&obj, theta, bs)?;
        println!("  block {bs:>4}: relative difference {:.2e}", rel_err(&g.grad, &reference.grad));
    }
    let single = accumulate_full_with(
        &obj,
        theta,
        &AccumulationConfig {
            block_size: 128,
            precision: Precision::F32,
        },
    )?;
    println!("  f32 accumulation: relative difference {:.2e}", rel_err(&single.grad, &reference.grad));

    let xs: Vec<f64> = (0..10_000).map(|i| 1e10 + (i % 97) as f64 * 1e-3).collect();
    let exact = 1e10 + (0..10_000).map(|i| (i % 97) as f64 * 1e-3).sum::<f64>() / 1e4;
    let naive = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut online = StreamingMean::new(1);
    for x in &xs {
        online.push(&[*x], 1.0);
    }
    println!("offset mean: naive error {:.3e}, online error {:.3e}", (naive - exact).abs(), (online.mean()[0] - exact).abs());
    Ok(())
}
