//! The optimizer loop runs on anything implementing `Objective`; here a
//! least-squares problem with a known minimizer.

use fblab::harness::TrainConfig;
use fblab::model::{Objective, ParamVector, QuadraticObjective};
use fblab::optim::{optimize, Schedule};
use fblab::reg::RegConfig;

fn main() -> fblab::Result<()> {
    // rows of A and b with the exact solution θ = (1, -2, 0.5)
    let a = vec![2.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, -1.0, 3.0, 1.0, 1.0, 1.0, 0.5, 2.0, -1.0];
    let truth = [1.0, -2.0, 0.5];
    let b: Vec<f64> = a.chunks(3).map(|r| r.iter().zip(&truth).map(|(x, t)| x * t).sum()).collect();
    let quad = QuadraticObjective::new(a, b, 3)?;

    let mut cfg = TrainConfig {
        schedule: Schedule::scaled(0.05, 300),
        clip: None,
        ..TrainConfig::default()
    };
    cfg.optimizer.weight_decay = 0.0;
    for reg in [None, Some(RegConfig { block_size: 2, ..RegConfig::default() })] {
        cfg.reg = reg;
        let log = optimize(&cfg, &quad, ParamVector::flat(vec![0.0; 3]))?;
        let theta = log.last.expect("final parameters");
        println!(
            "penalty {}: loss {:.3e} -> {:.3e}, θ = {:.6?}",
            if reg.is_some() { "on " } else { "off" },
            log.steps[0].train_loss,
            quad.loss(theta.values(), &quad.all_indices())?,
            theta.values()
        );
    }
    Ok(())
}
