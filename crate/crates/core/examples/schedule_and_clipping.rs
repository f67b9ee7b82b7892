//! The learning-rate schedule, global clipping and one Nesterov step.

use fblab::optim::{clip_global, lr_at, nesterov_update, ClipConfig, MomentumConfig, MomentumState, Schedule};

fn main() -> fblab::Result<()> {
    let s = Schedule::default();
    println!("warmup {} steps to {}, cosine over {}, stop at {}", s.warmup_steps, s.peak_lr, s.anneal_horizon, s.total_steps);
    for k in [0, 100, 400, 1000, 2000, 3000] {
        println!("  lr({k:>4}) = {:.5}", lr_at(k, &s)?);
    }
    let doubled = Schedule { peak_lr: 0.8, ..s };
    println!("  peak 0.8 ends at {:.5}", lr_at(3000, &doubled)?);

    let clip = ClipConfig::default();
    for g in [vec![3.0, 4.0], vec![0.1, -0.1]] {
        let (out, clipped) = clip_global(&g, &clip)?;
        println!("clip {g:?} -> {out:.6?} (clipped: {clipped})");
    }

    // L = θ²/2 from θ = 1
    let mut theta = vec![1.0];
    let mut state = MomentumState::new(
        1,
        MomentumConfig {
            weight_decay: 0.0,
            ..MomentumConfig::default()
        },
    );
    for step in 1..=5 {
        let g = theta.clone();
        nesterov_update(&mut theta, &mut state, &g, 0.1)?;
        println!("nesterov step {step}: θ = {:.6}, v = {:.6}", theta[0], state.buffer[0]);
    }
    Ok(())
}
