//! SAM's ascent gradient against gradient-plus-penalty: with the penalty's
//! step set to ρ they line up as `(1 − κ)·g + κ·g_SAM`.

use fblab::data::{make_synthetic, SyntheticKind};
use fblab::model::{init_model, LossConfig, MlpObjective, ModelSpec, Objective};
use fblab::reg::{penalty_grad, sam_grad, RegConfig, SamConfig};
use fblab::vecmath::{norm, rel_err};

fn main() -> fblab::Result<()> {
    let ds = make_synthetic(SyntheticKind::Rings, 40, 2, 2, 4)?;
    let spec = ModelSpec::new(vec![2, 16, 2]).with_seed(1);
    let obj = MlpObjective::new(&spec, &ds, LossConfig::default())?;
    let params = init_model(&spec)?;
    let theta = params.values();
    let all = obj.all_indices();

    let rho = 0.01;
    let g = obj.grad(theta, &all)?.grad;
    let sam = sam_grad(&obj, theta, &all, &SamConfig { rho })?;
    let cfg = RegConfig { eps_numerator: rho, ..RegConfig::default() };
    println!("‖g‖ = {:.6}, ‖g_SAM‖ = {:.6}", norm(&g), norm(&sam));
    for kappa in [0.25, 0.5, 1.0, 2.0] {
        let tau = 2.0 * kappa * rho / norm(&g);
        let pen = penalty_grad(&obj, theta, std::slice::from_ref(&all), &cfg, tau)?;
        let combined: Vec<f64> = g.iter().zip(&pen.grad).map(|(a, b)| a + b).collect();
        let mix: Vec<f64> = g.iter().zip(&sam).map(|(a, s)| (1.0 - kappa) * a + kappa * s).collect();
        println!("κ = {kappa:<4}  τ = {tau:.5}  relative gap {:.2e}", rel_err(&combined, &mix));
    }
    Ok(())
}
