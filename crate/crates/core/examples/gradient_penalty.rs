//! The block gradient-norm penalty and its finite-difference gradient,
//! compared with the exact-Hessian version across step lengths.
//!
//! With ReLU the default step crosses activation kinks, so the difference
//! quotient sees curvature the pointwise Hessian does not; tanh does not
//! have that problem.

use fblab::data::{make_synthetic, SyntheticKind};
use fblab::model::{init_model, Activation, LossConfig, MlpObjective, ModelSpec};
use fblab::optim::contiguous_blocks;
use fblab::reg::{penalty_grad, DiffMode, RegConfig};
use fblab::vecmath::{cosine, rel_err};

fn main() -> fblab::Result<()> {
    let ds = make_synthetic(SyntheticKind::Gaussians, 64, 3, 3, 5)?;
    let blocks = contiguous_blocks(ds.len(), 16);
    let tau = 0.4;
    for act in [Activation::Relu, Activation::Tanh] {
        let spec = ModelSpec::new(vec![3, 8, 3]).with_seed(2).with_activation(act);
        let obj = MlpObjective::new(&spec, &ds, LossConfig::default())?;
        let params = init_model(&spec)?;
        let theta = params.values();
        let oracle = RegConfig {
            diff_mode: DiffMode::Oracle,
            ..RegConfig::default()
        };
        let exact = penalty_grad(&obj, theta, &blocks, &oracle, tau)?;
        println!(
            "{act:?}: R = {:.6}, coefficient {:.3}, {} blocks",
            exact.value, exact.coefficient, exact.blocks_used
        );
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            for mode in [DiffMode::Forward, DiffMode::Central] {
                let cfg = RegConfig {
                    diff_mode: mode,
                    eps_numerator: eps,
                    ..RegConfig::default()
                };
                let rep = penalty_grad(&obj, theta, &blocks, &cfg, tau)?;
                println!(
                    "  {mode:?} step {eps:e}: cos {:.6}, rel err {:.2e}",
                    cosine(&rep.grad, &exact.grad),
                    rel_err(&rep.grad, &exact.grad)
                );
            }
        }
    }
    Ok(())
}
