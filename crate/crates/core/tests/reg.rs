mod common;

use fblab::data::{Dataset, Provenance};
use fblab::model::{hessian_oracle, init_model, LossConfig, MlpObjective, ModelSpec, Objective, QuadraticObjective};
use fblab::reg::{
    epsilon_for, penalty_grad, penalty_value, reg_grad_block, sam_grad, DiffMode, RegConfig, SamConfig,
};
use fblab::vecmath::{cosine, dot, norm, rel_err};
use fblab::Error;
use proptest::prelude::*;

use common::{tiny_fixtures, TinyNet};

fn four_points() -> (ModelSpec, Dataset) {
    let ds = Dataset::new(
        vec![0.5, -1.0, 1.5, 0.25, -0.75, 0.8, 0.1, 0.1],
        vec![0, 1, 1, 0],
        2,
        2,
        Provenance::Synthetic,
        0,
    )
    .unwrap();
    (ModelSpec::new(vec![2, 4, 2]).with_seed(9), ds)
}

#[test]
fn single_block_penalty_is_squared_full_gradient_norm() {
    let (spec, ds) = four_points();
    let obj = MlpObjective::new(&spec, &ds, LossConfig::default()).unwrap();
    let p = init_model(&spec).unwrap();
    let all = obj.all_indices();
    let g = obj.grad(p.values(), &all).unwrap().grad;
    assert_eq!(penalty_value(&obj, p.values(), &[all]).unwrap(), dot(&g, &g));
}

#[test]
fn two_block_penalty_matches_per_example_brute_force() {
    let (spec, ds) = four_points();
    let obj = MlpObjective::new(&spec, &ds, LossConfig::default()).unwrap();
    let p = init_model(&spec).unwrap();
    let per: Vec<Vec<f64>> = (0..4).map(|i| obj.grad(p.values(), &[i]).unwrap().grad).collect();
    let block_mean = |a: usize, b: usize| -> Vec<f64> { per[a].iter().zip(&per[b]).map(|(x, y)| 0.5 * (x + y)).collect() };
    let (b0, b1) = (block_mean(0, 1), block_mean(2, 3));
    let want = 0.5 * (dot(&b0, &b0) + dot(&b1, &b1));
    let got = penalty_value(&obj, p.values(), &[vec![0, 1], vec![2, 3]]).unwrap();
    assert!((got - want).abs() <= 1e-14 * want);
}

#[test]
fn penalty_vanishes_where_every_example_is_critical() {
    // consistent system: every row residual is zero at θ = (1, 2)
    let quad = QuadraticObjective::new(vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], 2).unwrap();
    let blocks = vec![vec![0], vec![1, 2]];
    assert_eq!(penalty_value(&quad, &[1.0, 2.0], &blocks).unwrap(), 0.0);
    let rep = penalty_grad(&quad, &[1.0, 2.0], &blocks, &RegConfig::default(), 0.4).unwrap();
    assert_eq!(rep.blocks_skipped_zero_grad, 2);
    assert_eq!(rep.blocks_used, 0);
    assert!(rep.grad.iter().all(|&x| x == 0.0));
}

#[test]
fn empty_block_is_a_config_error() {
    let quad = QuadraticObjective::new(vec![1.0, 1.0], vec![1.0, 1.0], 1).unwrap();
    assert!(matches!(penalty_value(&quad, &[0.0], &[vec![0], vec![]]), Err(Error::Config(_))));
}

#[test]
fn epsilon_rule() {
    let cfg = RegConfig::default();
    assert!((epsilon_for(&[2.0, 0.0], &cfg).unwrap() - 0.005).abs() < 1e-18);
    assert!((epsilon_for(&[0.0, 0.01], &cfg).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(epsilon_for(&[0.0, 0.0], &cfg), None);
    assert_eq!(epsilon_for(&[1e-13], &cfg), None);
}

#[test]
fn central_mode_on_quadratic_is_closed_form() {
    let a = vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0, 1.5, -0.5, 2.0, 1.0, 1.0, -2.0];
    let b = vec![0.5, -1.0, 2.0, 0.25];
    let quad = QuadraticObjective::new(a, b, 3).unwrap();
    let theta = [0.2, -0.4, 0.9];
    let all = quad.all_indices();
    let g = quad.grad(&theta, &all).unwrap().grad;
    let h = quad.hessian();
    let want: Vec<f64> = (0..3).map(|i| (0..3).map(|j| h[i * 3 + j] * g[j]).sum()).collect();
    let cfg = RegConfig {
        diff_mode: DiffMode::Central,
        ..RegConfig::default()
    };
    let got = reg_grad_block(&quad, &theta, &all, &cfg).unwrap().grad;
    assert!(rel_err(&got, &want) <= 1e-6);
}

#[test]
fn forward_vs_oracle_on_22_param_net() {
    let (spec, ds) = four_points();
    let obj = MlpObjective::new(&spec, &ds, LossConfig::default()).unwrap();
    let p = init_model(&spec).unwrap();
    let all = obj.all_indices();
    let fwd = reg_grad_block(&obj, p.values(), &all, &RegConfig::default()).unwrap();
    let oracle = reg_grad_block(
        &obj,
        p.values(),
        &all,
        &RegConfig {
            diff_mode: DiffMode::Oracle,
            ..RegConfig::default()
        },
    )
    .unwrap();
    assert!(cosine(&fwd.grad, &oracle.grad) >= 0.999);
}

#[test]
fn coefficient_and_zero_alpha() {
    assert!((RegConfig::default().coefficient(0.8) - 0.2).abs() < 1e-16);
    let f = TinyNet::new(vec![2, 4, 2], 8, 3);
    let obj = f.objective();
    let blocks = vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]];
    let cfg = RegConfig {
        alpha: 0.0,
        ..RegConfig::default()
    };
    let rep = penalty_grad(&obj, f.params.values(), &blocks, &cfg, 0.4).unwrap();
    assert_eq!(rep.coefficient, 0.0);
    assert!(rep.grad.iter().all(|&x| x == 0.0));
    assert!(rep.value > 0.0);
    assert_eq!(rep.value, penalty_value(&obj, f.params.values(), &blocks).unwrap());
}

#[test]
fn penalty_gradient_scaling_against_exact_hessian() {
    // With exact H·g the reported gradient must be (ατ/2)·mean_B(H_B g_B).
    for f in tiny_fixtures() {
        let obj = f.objective();
        let theta = f.params.values();
        let blocks: Vec<Vec<usize>> = obj.all_indices().chunks(5).map(<[usize]>::to_vec).collect();
        let cfg = RegConfig {
            alpha: 0.7,
            diff_mode: DiffMode::Oracle,
            ..RegConfig::default()
        };
        let tau = 0.3;
        let rep = penalty_grad(&obj, theta, &blocks, &cfg, tau).unwrap();
        let mut want = vec![0.0; theta.len()];
        for b in &blocks {
            let g = obj.grad(theta, b).unwrap().grad;
            let hg = hessian_oracle(&obj, theta, b).unwrap().matvec(&g);
            for (w, x) in want.iter_mut().zip(&hg) {
                *w += 0.5 * cfg.alpha * tau * x / blocks.len() as f64;
            }
        }
        assert!(rel_err(&rep.grad, &want) <= 1e-12);
    }
}

#[test]
fn sam_small_rho_limit_and_zero_gradient() {
    let f = TinyNet::new(vec![3, 5, 3], 12, 7);
    let obj = f.objective();
    let all = obj.all_indices();
    let theta = f.params.values();
    let g = obj.grad(theta, &all).unwrap().grad;
    let s = sam_grad(&obj, theta, &all, &SamConfig { rho: 1e-10 }).unwrap();
    assert!(rel_err(&s, &g) <= 1e-6);
    assert!(matches!(
        sam_grad(&obj, theta, &all, &SamConfig { rho: 0.0 }),
        Err(Error::Config(_))
    ));

    let quad = QuadraticObjective::new(vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0], 2).unwrap();
    let at_min = sam_grad(&quad, &[1.0, 1.0], &[0, 1], &SamConfig::default()).unwrap();
    assert_eq!(at_min, vec![0.0, 0.0]);
}

#[test]
fn sam_interpolation_identity() {
    let f = TinyNet::new(vec![2, 6, 2], 10, 12);
    let obj = f.objective();
    let all = obj.all_indices();
    let theta = f.params.values();
    let rho = 0.01;
    let g = obj.grad(theta, &all).unwrap().grad;
    let sam = sam_grad(&obj, theta, &all, &SamConfig { rho }).unwrap();
    let cfg = RegConfig {
        eps_numerator: rho,
        ..RegConfig::default()
    };
    for kappa in [0.25, 0.5, 1.0, 2.0] {
        let tau = 2.0 * kappa * rho / norm(&g);
        let pen = penalty_grad(&obj, theta, std::slice::from_ref(&all), &cfg, tau).unwrap();
        let combined: Vec<f64> = g.iter().zip(&pen.grad).map(|(a, b)| a + b).collect();
        let want: Vec<f64> = g.iter().zip(&sam).map(|(a, s)| (1.0 - kappa) * a + kappa * s).collect();
        assert!(rel_err(&combined, &want) <= 1e-6, "kappa {kappa}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_params_untouched_and_accounting(seed in 0u64..500, bs in 1usize..9, mode in 0usize..3) {
        let f = TinyNet::new(vec![2, 4, 2], 12, seed);
        let obj = f.objective();
        let theta = f.params.values().to_vec();
        let before: Vec<u64> = theta.iter().map(|x| x.to_bits()).collect();
        let blocks: Vec<Vec<usize>> = obj.all_indices().chunks(bs).map(<[usize]>::to_vec).collect();
        let diff_mode = [DiffMode::Forward, DiffMode::Central, DiffMode::Oracle][mode];
        let cfg = RegConfig { diff_mode, ..RegConfig::default() };
        let rep = penalty_grad(&obj, &theta, &blocks, &cfg, 0.4).unwrap();
        prop_assert_eq!(rep.blocks_used + rep.blocks_skipped_zero_grad, blocks.len());
        let _ = sam_grad(&obj, &theta, &blocks[0], &SamConfig::default()).unwrap();
        prop_assert_eq!(before, theta.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        prop_assert!(rep.grad.iter().all(|x| x.is_finite()));
    }
}
