//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use fblab::data::{expand_fixed, AugmentationKind, AugmentationSpec, Dataset, Provenance};
use fblab::diagnostics::{curvature_proxy, gradient_diversity, landscape_1d, repro_error, symmetric_grid};
use fblab::harness::{preset, Preset};
use fblab::model::{hessian_oracle, init_model, LossConfig, MlpObjective, ModelSpec, Objective, QuadraticObjective};
use fblab::optim::{
    accumulate_full, clip_global, lr_at, train, AccumulationConfig, ClipConfig, Schedule, StreamingMean,
};
use fblab::reg::{penalty_grad, penalty_value, reg_grad_block, sam_grad, DiffMode, RegConfig, SamConfig};
use fblab::seed;
use fblab::vecmath::{cosine, dot, norm, rel_err};
use rand::Rng;
use rand_distr::StandardNormal;

use common::{exact_sum, hvp_richardson, tiny_fixtures, TinyNet};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const PROBE_DIRECTION_SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut r = seed::rng(seed);
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sample_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn schedule_anchors() -> Outcome {
    let s = Schedule::default();
    let strong = Schedule {
        peak_lr: 0.8,
        ..Schedule::default()
    };
    let at0 = lr_at(0, &s).unwrap();
    let at400 = lr_at(400, &s).unwrap();
    let end = lr_at(3000, &s).unwrap();
    let end_strong = lr_at(3000, &strong).unwrap();
    let pass = at0 == 0.0 && at400 == 0.4 && (end - 0.1093).abs() <= 1e-3 && (end_strong - 0.2187).abs() <= 1e-3;
    outcome(
        pass,
        format!("lr(0)={at0} lr(400)={at400} lr(3000)={end:.5} (peak .8: {end_strong:.5})"),
    )
}

fn clipping_contract() -> Outcome {
    let cfg = ClipConfig::default();
    let g = [0.6, 0.0, -0.8];
    let (c, clipped) = clip_global(&g, &cfg).unwrap();
    let want = 0.25 / (1.0 + 1e-6);
    let norm_err = (norm(&c) - want).abs();
    let cos = cosine(&c, &g);
    let small = [0.1, -0.1];
    let (s, s_clipped) = clip_global(&small, &cfg).unwrap();
    let pass = clipped && norm_err <= 1e-12 && (cos - 1.0).abs() <= 1e-12 && !s_clipped && s == small;
    outcome(pass, format!("norm error {norm_err:.1e}, cosine {cos:.15}, below-threshold no-op {}", s == small))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_cos: f64 = 1.0;
    let mut worst_rel: f64 = 0.0;
    let mut worst_oracle_check: f64 = 0.0;
    for f in tiny_fixtures() {
        let obj = f.objective();
        let all = obj.all_indices();
        let theta = f.params.values();
        let g = obj.grad(theta, &all).unwrap().grad;
        let fd = reg_grad_block(&obj, theta, &all, &RegConfig::default()).unwrap().grad;
        let hg = hessian_oracle(&obj, theta, &all).unwrap().matvec(&g);
        let independent = hvp_richardson(&obj, theta, &all, &g);
        worst_cos = worst_cos.min(cosine(&fd, &hg));
        worst_rel = worst_rel.max(rel_err(&fd, &hg));
        worst_oracle_check = worst_oracle_check.max(rel_err(&hg, &independent));
    }

    // Quadratic fixture with exactly known Hessian AᵀA.
    let a = gaussian(6 * 4, 11);
    let b = gaussian(6, 12);
    let quad = QuadraticObjective::new(a, b, 4).unwrap();
    let theta = gaussian(4, 13);
    let all = quad.all_indices();
    let g = quad.grad(&theta, &all).unwrap().grad;
    let h = quad.hessian();
    let exact: Vec<f64> = (0..4).map(|i| (0..4).map(|j| h[i * 4 + j] * g[j]).sum()).collect();
    let mode = |m| {
        let cfg = RegConfig {
            diff_mode: m,
            ..RegConfig::default()
        };
        rel_err(&reg_grad_block(&quad, &theta, &all, &cfg).unwrap().grad, &exact)
    };
    let fwd = mode(DiffMode::Forward);
    let cen = mode(DiffMode::Central);

    let pass = worst_cos >= 0.999 && worst_rel <= 1e-2 && cen <= fwd && worst_oracle_check <= 1e-6;
    outcome(
        pass,
        format!(
            "worst cosine {worst_cos:.6}, worst rel err {worst_rel:.2e}, oracle vs Richardson {worst_oracle_check:.1e}; quadratic forward {fwd:.2e} central {cen:.2e}"
        ),
    )
}

fn penalty_consistency() -> Outcome {
    let worst_for = |mode| -> f64 {
        let tau = 0.4;
        let cfg = RegConfig {
            block_size: 4,
            diff_mode: mode,
            ..RegConfig::default()
        };
        let mut worst: f64 = 0.0;
        for (k, f) in tiny_fixtures().iter().enumerate() {
            let obj = f.objective();
            let blocks: Vec<Vec<usize>> = obj.all_indices().chunks(cfg.block_size).map(<[usize]>::to_vec).collect();
            let theta = f.params.values();
            let rep = penalty_grad(&obj, theta, &blocks, &cfg, tau).unwrap();
            let v = gaussian(theta.len(), 200 + k as u64);
            let h = 1e-4 / norm(&v);
            let shifted = |s: f64| -> f64 {
                let p: Vec<f64> = theta.iter().zip(&v).map(|(t, d)| t + s * d).collect();
                rep.coefficient * penalty_value(&obj, &p, &blocks).unwrap()
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            let analytic = dot(&rep.grad, &v);
            worst = worst.max((numeric - analytic).abs() / numeric.abs().max(analytic.abs()));
        }
        worst
    };
    let central = worst_for(DiffMode::Central);
    let forward = worst_for(DiffMode::Forward);
    outcome(
        central <= 1e-3,
        format!("worst directional relative error {central:.2e} (central differences; forward gives {forward:.2e})"),
    )
}

fn sam_equivalence() -> Outcome {
    let f = TinyNet::new(vec![3, 6, 3], 12, 21);
    let obj = f.objective();
    let all = obj.all_indices();
    let theta = f.params.values();
    let rho = 0.01;
    let alpha = 1.0;
    let g = obj.grad(theta, &all).unwrap().grad;
    let gn = norm(&g);
    let sam = sam_grad(&obj, theta, &all, &SamConfig { rho }).unwrap();
    let cfg = RegConfig {
        alpha,
        eps_numerator: rho,
        block_size: all.len(),
        ..RegConfig::default()
    };
    let mut worst_identity: f64 = 0.0;
    let mut at_one = f64::NAN;
    for kappa in [1.0, 0.25, 0.5, 2.0] {
        // κ = (ατ/2)(‖g‖/ρ)
        let tau = 2.0 * kappa * rho / (alpha * gn);
        let pen = penalty_grad(&obj, theta, std::slice::from_ref(&all), &cfg, tau).unwrap();
        let combined: Vec<f64> = g.iter().zip(&pen.grad).map(|(a, b)| a + b).collect();
        let interpolated: Vec<f64> = g.iter().zip(&sam).map(|(gi, si)| (1.0 - kappa) * gi + kappa * si).collect();
        if kappa == 1.0 {
            at_one = rel_err(&combined, &sam);
        } else {
            worst_identity = worst_identity.max(rel_err(&combined, &interpolated));
        }
    }
    outcome(
        at_one <= 1e-5 && worst_identity <= 1e-5,
        format!("at equivalence point {at_one:.1e}, interpolation identity worst {worst_identity:.1e}"),
    )
}

fn accumulation_stability() -> Outcome {
    let f = TinyNet::new(vec![3, 8, 3], 97, 31);
    let obj = f.objective();
    let theta = f.params.values();
    let per = obj.per_example_grads(theta, &obj.all_indices()).unwrap();
    let n = per.len() as f64;
    let reference: Vec<f64> = (0..theta.len())
        .map(|j| exact_sum(per.iter().map(|g| g.grad[j])) / n)
        .collect();
    let mut worst: f64 = 0.0;
    for bs in [1, 7, 32, 128, 97] {
        worst = worst.max(rel_err(&accumulate_full(&obj, theta, bs).unwrap().grad, &reference));
    }

    // Large common offset with ten orders of magnitude of spread on top.
    let mut r = seed::rng(41);
    let xs: Vec<f64> = (0..10_000)
        .map(|_| 1e10 + 10f64.powf(r.random_range(-5.0..5.0)))
        .collect();
    let exact = exact_sum(xs.iter().copied()) / xs.len() as f64;
    let mut online = StreamingMean::new(1);
    let mut naive = 0.0;
    for &x in &xs {
        online.push(&[x], 1.0);
        naive += x;
    }
    naive /= xs.len() as f64;
    let online_err = (online.mean()[0] - exact).abs();
    let naive_err = (naive - exact).abs();
    outcome(
        worst <= 1e-10 && online_err <= naive_err,
        format!("block-size invariance {worst:.1e}; online error {online_err:.2e} vs naive {naive_err:.2e}"),
    )
}

fn diversity() -> Outcome {
    let one = Dataset::new(vec![0.3, -1.2, 0.7], vec![1], 3, 2, Provenance::Synthetic, 0).unwrap();
    let n = 16;
    let dup = one.subset(&vec![0; n]).unwrap();
    let spec = ModelSpec::new(vec![3, 5, 2]).with_seed(3);
    let obj = MlpObjective::new(&spec, &dup, LossConfig::default()).unwrap();
    let p = init_model(&spec).unwrap();
    let d_dup = gradient_diversity(&obj, p.values()).unwrap().delta_d;
    let dup_err = (d_dup - 1.0 / n as f64).abs();

    let mut eye = vec![0.0; 25];
    for i in 0..5 {
        eye[i * 5 + i] = 1.0;
    }
    let quad = QuadraticObjective::new(eye, vec![2.0; 5], 5).unwrap();
    let d_orth = gradient_diversity(&quad, &[0.0; 5]).unwrap().delta_d;
    let orth_err = (d_orth - 1.0).abs();

    let mut brute_worst: f64 = 0.0;
    for s in 0..5 {
        let f = TinyNet::new(vec![2, 5, 3], 8, 50 + s);
        let obj = f.objective();
        let theta = f.params.values();
        let grads: Vec<Vec<f64>> = (0..8).map(|i| obj.grad(theta, &[i]).unwrap().grad).collect();
        let num: f64 = grads.iter().map(|g| dot(g, g)).sum();
        let mean: Vec<f64> = (0..theta.len())
            .map(|j| grads.iter().map(|g| g[j]).sum::<f64>() / 8.0)
            .collect();
        let want = num / (64.0 * dot(&mean, &mean));
        let got = gradient_diversity(&obj, theta).unwrap().delta_d;
        brute_worst = brute_worst.max((got - want).abs() / want);
    }
    outcome(
        dup_err <= 1e-10 && orth_err <= 1e-10 && brute_worst <= 1e-10,
        format!("duplicated {d_dup:.12} (1/N = {}), orthogonal {d_orth:.12}, brute-force worst {brute_worst:.1e}", 1.0 / n as f64),
    )
}

fn determinism() -> Outcome {
    let mut cfg = preset(Preset::FbReg);
    cfg.schedule = Schedule::scaled(0.4, 25);
    cfg.eval_every = 5;
    let (tr, va) = cfg.dataset.load().unwrap();
    let a = train(&cfg, &tr, va.as_ref()).unwrap();
    let b = train(&cfg, &tr, va.as_ref()).unwrap();
    let same_log = a.steps.len() == b.steps.len()
        && a.steps.iter().zip(&b.steps).all(|(x, y)| {
            x.train_loss.to_bits() == y.train_loss.to_bits()
                && x.full_loss.to_bits() == y.full_loss.to_bits()
                && x.grad_norm_pre.to_bits() == y.grad_norm_pre.to_bits()
        })
        && a.last.as_ref().unwrap().bit_eq(b.last.as_ref().unwrap());
    let obj = MlpObjective::new(&cfg.model, &tr, cfg.loss).unwrap();
    let rep = repro_error(&obj, a.last.as_ref().unwrap().values(), 4, &AccumulationConfig::new(128)).unwrap();
    let zero = rep.total_error == 0.0 && rep.relative_error == Some(0.0);
    outcome(
        same_log && zero,
        format!("bit-identical runs {same_log}; repro error ({}, {:?})", rep.total_error, rep.relative_error),
    )
}

struct PresetRuns {
    val_acc: Vec<f64>,
    curvature: Vec<f64>,
}

fn run_preset(p: Preset) -> PresetRuns {
    let mut val_acc = Vec::new();
    let mut curvature = Vec::new();
    for s in SEEDS {
        let mut cfg = preset(p);
        cfg.run_seed = s;
        let (tr, va) = cfg.dataset.load().unwrap();
        let log = train(&cfg, &tr, va.as_ref()).unwrap();
        assert!(!log.aborted(), "{p} seed {s} aborted: {:?}", log.summary.abort);
        val_acc.push(log.summary.final_val_acc.unwrap());
        let last = log.last.unwrap();
        let probe = landscape_1d(&last, &cfg.model, &tr, cfg.loss, PROBE_DIRECTION_SEED, &symmetric_grid(0.5, 1)).unwrap();
        curvature.push(curvature_proxy(&probe).unwrap());
    }
    PresetRuns { val_acc, curvature }
}

fn generalization_and_flatness() -> (Outcome, Outcome) {
    let t = Instant::now();
    let sgd = run_preset(Preset::BaselineSgd);
    let fb_base = run_preset(Preset::FbBase);
    let fb_strong = run_preset(Preset::FbStrong);
    let sgd_reg = run_preset(Preset::SgdRegularized);
    let elapsed = t.elapsed().as_secs_f64();

    let m_sgd = median(sgd.val_acc.clone());
    let m_base = median(fb_base.val_acc.clone());
    let m_strong = median(fb_strong.val_acc.clone());
    let m_reg = median(sgd_reg.val_acc.clone());
    let gap = m_sgd - m_base;
    let recovered = (m_strong - m_base) / gap;
    let std_sgd = sample_std(&sgd.val_acc);
    let lift = (m_reg - m_sgd).abs();
    let a = gap >= 0.01;
    let b = recovered >= 0.5;
    let c = lift < std_sgd;
    let nine = outcome(
        a && b && c,
        format!(
            "(a) {} gap {gap:.4} [sgd {m_sgd:.4}, fb_base {m_base:.4}]; (b) {} recovered {:.0}% [fb_strong {m_strong:.4}]; (c) {} |sgd_regularized {m_reg:.4} - sgd| = {lift:.4} vs seed std {std_sgd:.4}; {elapsed:.0}s",
            pf(a),
            pf(b),
            100.0 * recovered,
            pf(c)
        ),
    );

    let c_base = median(fb_base.curvature.clone());
    let c_strong = median(fb_strong.curvature.clone());
    let ten = outcome(
        c_strong < c_base,
        format!(
            "median curvature fb_strong {c_strong:.4} vs fb_base {c_base:.4} (sgd {:.4})",
            median(sgd.curvature.clone())
        ),
    );
    (nine, ten)
}

fn pf(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn expansion_determinism() -> Outcome {
    let base = fblab::data::make_synthetic(fblab::data::SyntheticKind::Rings, 60, 3, 3, 5).unwrap();
    let aug = AugmentationSpec {
        kind: AugmentationKind::GaussianJitter,
        magnitude: 0.1,
        seed: 9,
    };
    let x = expand_fixed(&base, 10, &aug).unwrap().to_bytes();
    let y = expand_fixed(&base, 10, &aug).unwrap().to_bytes();
    let zero = expand_fixed(&base, 10, &AugmentationSpec { magnitude: 0.0, ..aug }).unwrap();
    let n = base.len();
    let concat = zero.len() == 10 * n
        && (0..zero.len()).all(|i| zero.row(i) == base.row(i % n) && zero.label(i) == base.label(i % n));
    outcome(x == y && concat, format!("byte-identical {}, zero-magnitude is 10-fold concatenation {concat}", x == y))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "schedule anchors", schedule_anchors()),
        (2, "clipping contract", clipping_contract()),
        (3, "regularizer gradient vs Hessian oracle", oracle_equivalence()),
        (4, "penalty/gradient consistency", penalty_consistency()),
        (5, "SAM equivalence point", sam_equivalence()),
        (6, "accumulation stability", accumulation_stability()),
        (7, "gradient diversity", diversity()),
        (8, "determinism", determinism()),
    ];
    let (nine, ten) = generalization_and_flatness();
    results.push((9, "directional generalization", nine));
    results.push((10, "flatness probe", ten));
    results.push((11, "fixed expansion determinism", expansion_determinism()));

    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
