#![allow(dead_code)]

use fblab::data::{make_synthetic, Dataset, SyntheticKind};
use fblab::model::{init_model, Activation, LossConfig, MlpObjective, ModelSpec, Objective, ParamVector};

/// Sum with exactly-tracked rounding error (Shewchuk partials), accurate to
/// the last bit for the inputs used here.
pub fn exact_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    partials.iter().rev().fold(0.0, |acc, &p| acc + p)
}

/// Hessian-vector product of `obj` over `batch` by Richardson-extrapolated
/// central differences of the gradient.
pub fn hvp_richardson<O: Objective + ?Sized>(obj: &O, params: &[f64], batch: &[usize], v: &[f64]) -> Vec<f64> {
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d = |h: f64| -> Vec<f64> {
        let plus: Vec<f64> = params.iter().zip(v).map(|(p, x)| p + h * x).collect();
        let minus: Vec<f64> = params.iter().zip(v).map(|(p, x)| p - h * x).collect();
        let gp = obj.grad(&plus, batch).unwrap().grad;
        let gm = obj.grad(&minus, batch).unwrap().grad;
        gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let h = 1e-3 / vn;
    let coarse = d(h);
    let fine = d(h / 2.0);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// Small smooth network with data.
pub struct TinyNet {
    pub spec: ModelSpec,
    pub data: Dataset,
    pub params: ParamVector,
}

impl TinyNet {
    pub fn new(widths: Vec<usize>, n: usize, seed: u64) -> Self {
        let dim = widths[0];
        let classes = *widths.last().unwrap();
        let spec = ModelSpec::new(widths)
            .with_activation(Activation::Tanh)
            .with_seed(seed);
        let data = make_synthetic(SyntheticKind::Gaussians, n, dim, classes, seed + 100).unwrap();
        let params = init_model(&spec).unwrap();
        TinyNet { spec, data, params }
    }

    pub fn objective(&self) -> MlpObjective<'_> {
        MlpObjective::new(&self.spec, &self.data, LossConfig::default()).unwrap()
    }
}

/// Five fixtures of different shapes, all under the Hessian oracle cap.
pub fn tiny_fixtures() -> Vec<TinyNet> {
    vec![
        TinyNet::new(vec![2, 4, 2], 10, 1),
        TinyNet::new(vec![3, 5, 3], 12, 2),
        TinyNet::new(vec![2, 6, 6, 2], 16, 3),
        TinyNet::new(vec![4, 8, 3], 20, 4),
        TinyNet::new(vec![3, 10, 8, 4], 24, 5),
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
