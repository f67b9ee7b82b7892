use super::{check_batch, Activation, GradReport, LossConfig, ModelSpec, Normalization, Objective, ParamVector};
use crate::data::{Batch, Dataset};
use crate::error::{Error, Result};

const NORM_EPS: f64 = 1e-5;

/// Multi-layer perceptron with softmax cross-entropy and hand-written
/// backpropagation. Parameters are passed in on every call; the struct only
/// holds the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    activation: Activation,
    normalization: Normalization,
    param_count: usize,
}

struct Workspace {
    /// `acts[l]` is the input to layer `l`; `acts[0]` is the example.
    acts: Vec<Vec<f64>>,
    /// Input to the activation of hidden layer `l` (after normalization).
    pre: Vec<Vec<f64>>,
    inv_std: Vec<f64>,
    logits: Vec<f64>,
    delta: Vec<f64>,
    back: Vec<f64>,
}

impl Mlp {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            widths: spec.layer_widths.clone(),
            activation: spec.activation,
            normalization: spec.normalization,
            param_count: spec.param_count(),
        })
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn classes(&self) -> usize {
        *self.widths.last().expect("validated")
    }

    fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn workspace(&self) -> Workspace {
        let max_w = *self.widths.iter().max().expect("validated");
        Workspace {
            acts: self.widths[..self.widths.len() - 1].iter().map(|&w| vec![0.0; w]).collect(),
            pre: self.widths[1..self.widths.len() - 1].iter().map(|&w| vec![0.0; w]).collect(),
            inv_std: vec![0.0; self.layers()],
            logits: vec![0.0; self.classes()],
            delta: Vec::with_capacity(max_w),
            back: Vec::with_capacity(max_w),
        }
    }

    pub fn check_data(&self, ds: &Dataset) -> Result<()> {
        if ds.dim() != self.input_dim() {
            return Err(Error::shape(format!(
                "dataset has {} features, model expects {}",
                ds.dim(),
                self.input_dim()
            )));
        }
        if ds.classes() > self.classes() {
            return Err(Error::shape(format!(
                "dataset has {} classes, model outputs {}",
                ds.classes(),
                self.classes()
            )));
        }
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::shape(format!(
                "model needs {} parameters, got {}",
                self.param_count,
                params.len()
            )));
        }
        Ok(())
    }

    fn forward(&self, p: &[f64], x: &[f64], ws: &mut Workspace) {
        ws.acts[0].copy_from_slice(x);
        let mut offset = 0;
        let layers = self.layers();
        for l in 0..layers {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let w = &p[offset..offset + fan_in * fan_out];
            let b = &p[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;

            let input = &ws.acts[l];
            let out: &mut Vec<f64> = if l + 1 < layers { &mut ws.pre[l] } else { &mut ws.logits };
            for r in 0..fan_out {
                let row = &w[r * fan_in..(r + 1) * fan_in];
                out[r] = b[r] + row.iter().zip(input).map(|(a, c)| a * c).sum::<f64>();
            }
            if l + 1 == layers {
                break;
            }
            if self.normalization == Normalization::PerExampleNorm {
                let m = out.iter().sum::<f64>() / fan_out as f64;
                let var = out.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / fan_out as f64;
                let inv = 1.0 / (var + NORM_EPS).sqrt();
                for z in out.iter_mut() {
                    *z = (*z - m) * inv;
                }
                ws.inv_std[l] = inv;
            }
            let pre = &ws.pre[l];
            let next = &mut ws.acts[l + 1];
            match self.activation {
                Activation::Relu => {
                    // written out so that NaN propagates instead of becoming 0
                    for (a, &z) in next.iter_mut().zip(pre) {
                        *a = if z < 0.0 { 0.0 } else { z };
                    }
                }
                Activation::Tanh => {
                    for (a, &z) in next.iter_mut().zip(pre) {
                        *a = z.tanh();
                    }
                }
            }
        }
    }

    /// Loss of the current logits; leaves `dloss/dlogits` in `ws.delta`.
    fn loss_and_dlogits(&self, label: usize, smoothing: f64, ws: &mut Workspace) -> f64 {
        let k = ws.logits.len();
        let max = ws.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = ws.logits.iter().map(|z| (z - max).exp()).sum();
        let lse = max + sum_exp.ln();
        let off = smoothing / k as f64;
        let on = 1.0 - smoothing + off;
        let mut target_dot = 0.0;
        ws.delta.clear();
        for (c, &z) in ws.logits.iter().enumerate() {
            let q = if c == label { on } else { off };
            target_dot += q * z;
            ws.delta.push((z - lse).exp() - q);
        }
        lse - target_dot
    }

    /// Adds `d loss / d params` for the example in `ws` into `g`.
    fn backward(&self, p: &[f64], ws: &mut Workspace, g: &mut [f64]) {
        let layers = self.layers();
        let mut end = self.param_count;
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let b_off = end - fan_out;
            let w_off = b_off - fan_in * fan_out;
            end = w_off;

            let input = &ws.acts[l];
            for r in 0..fan_out {
                let d = ws.delta[r];
                g[b_off + r] += d;
                let grow = &mut g[w_off + r * fan_in..w_off + (r + 1) * fan_in];
                for (gi, &a) in grow.iter_mut().zip(input) {
                    *gi += d * a;
                }
            }
            if l == 0 {
                break;
            }

            let w = &p[w_off..b_off];
            ws.back.clear();
            ws.back.resize(fan_in, 0.0);
            for r in 0..fan_out {
                let d = ws.delta[r];
                let row = &w[r * fan_in..(r + 1) * fan_in];
                for (bk, &wv) in ws.back.iter_mut().zip(row) {
                    *bk += wv * d;
                }
            }
            // through the activation of hidden layer l - 1
            let h = l - 1;
            match self.activation {
                Activation::Relu => {
                    for (bk, &z) in ws.back.iter_mut().zip(&ws.pre[h]) {
                        if z <= 0.0 {
                            *bk = 0.0;
                        }
                    }
                }
                Activation::Tanh => {
                    for (bk, &a) in ws.back.iter_mut().zip(&ws.acts[l]) {
                        *bk *= 1.0 - a * a;
                    }
                }
            }
            if self.normalization == Normalization::PerExampleNorm {
                let y = &ws.pre[h];
                let m = fan_in as f64;
                let mean_d = ws.back.iter().sum::<f64>() / m;
                let mean_dy = ws.back.iter().zip(y).map(|(d, y)| d * y).sum::<f64>() / m;
                let inv = ws.inv_std[h];
                for (bk, &yv) in ws.back.iter_mut().zip(y) {
                    *bk = inv * (*bk - mean_d - yv * mean_dy);
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.back);
        }
    }

    fn example_loss(&self, p: &[f64], ds: &Dataset, i: usize, cfg: &LossConfig, ws: &mut Workspace) -> Result<f64> {
        self.forward(p, ds.row(i), ws);
        let loss = self.loss_and_dlogits(ds.label(i), cfg.label_smoothing, ws);
        if !loss.is_finite() {
            return Err(Error::numeric(format!("non-finite loss {loss} on example {i}")));
        }
        Ok(loss)
    }

    fn check(&self, params: &[f64], batch: &Batch<'_>) -> Result<()> {
        self.check_params(params)?;
        self.check_data(batch.dataset())?;
        check_batch(batch.indices(), batch.dataset().len())
    }

    /// Mean loss over the batch.
    pub fn forward_loss(&self, params: &ParamVector, batch: &Batch<'_>, cfg: &LossConfig) -> Result<f64> {
        self.loss_raw(params.values(), batch, cfg)
    }

    pub(crate) fn loss_raw(&self, params: &[f64], batch: &Batch<'_>, cfg: &LossConfig) -> Result<f64> {
        self.check(params, batch)?;
        let ds = batch.dataset();
        let mut ws = self.workspace();
        let mut total = 0.0;
        for &i in batch.indices() {
            total += self.example_loss(params, ds, i, cfg, &mut ws)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Gradient of the mean loss over the batch.
    pub fn grad(&self, params: &ParamVector, batch: &Batch<'_>, cfg: &LossConfig) -> Result<GradReport> {
        self.grad_raw(params.values(), batch, cfg)
    }

    pub(crate) fn grad_raw(&self, params: &[f64], batch: &Batch<'_>, cfg: &LossConfig) -> Result<GradReport> {
        self.check(params, batch)?;
        let ds = batch.dataset();
        let mut ws = self.workspace();
        let mut g = vec![0.0; self.param_count];
        let mut total = 0.0;
        for &i in batch.indices() {
            total += self.example_loss(params, ds, i, cfg, &mut ws)?;
            self.backward(params, &mut ws, &mut g);
        }
        let n = batch.len() as f64;
        let inv = 1.0 / n;
        for v in &mut g {
            *v *= inv;
        }
        Ok(GradReport {
            grad: g,
            loss: total / n,
            count: batch.len(),
        })
    }

    /// One report per example, in batch order.
    pub fn per_example_grads(&self, params: &ParamVector, batch: &Batch<'_>, cfg: &LossConfig) -> Result<Vec<GradReport>> {
        self.per_example_raw(params.values(), batch, cfg)
    }

    pub(crate) fn per_example_raw(&self, params: &[f64], batch: &Batch<'_>, cfg: &LossConfig) -> Result<Vec<GradReport>> {
        self.check(params, batch)?;
        let ds = batch.dataset();
        let mut ws = self.workspace();
        batch
            .indices()
            .iter()
            .map(|&i| {
                let loss = self.example_loss(params, ds, i, cfg, &mut ws)?;
                let mut g = vec![0.0; self.param_count];
                self.backward(params, &mut ws, &mut g);
                Ok(GradReport { grad: g, loss, count: 1 })
            })
            .collect()
    }

    pub fn predict(&self, params: &[f64], x: &[f64]) -> Result<usize> {
        self.check_params(params)?;
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!("input has {} features, model expects {}", x.len(), self.input_dim())));
        }
        let mut ws = self.workspace();
        self.forward(params, x, &mut ws);
        Ok(argmax(&ws.logits))
    }

    /// Mean loss and accuracy over a whole dataset.
    pub fn evaluate(&self, params: &[f64], ds: &Dataset, cfg: &LossConfig) -> Result<(f64, f64)> {
        self.check_params(params)?;
        self.check_data(ds)?;
        let mut ws = self.workspace();
        let mut total = 0.0;
        let mut correct = 0usize;
        for i in 0..ds.len() {
            total += self.example_loss(params, ds, i, cfg, &mut ws)?;
            correct += usize::from(argmax(&ws.logits) == ds.label(i));
        }
        let n = ds.len() as f64;
        Ok((total / n, correct as f64 / n))
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// An MLP bound to a dataset and loss: the mean training loss as an [`Objective`].
#[derive(Debug, Clone)]
pub struct MlpObjective<'a> {
    pub mlp: Mlp,
    pub data: &'a Dataset,
    pub loss: LossConfig,
}

impl<'a> MlpObjective<'a> {
    pub fn new(spec: &ModelSpec, data: &'a Dataset, loss: LossConfig) -> Result<Self> {
        let mlp = Mlp::new(spec)?;
        mlp.check_data(data)?;
        loss.validate()?;
        Ok(Self { mlp, data, loss })
    }
}

impl Objective for MlpObjective<'_> {
    fn param_count(&self) -> usize {
        self.mlp.param_count()
    }

    fn example_count(&self) -> usize {
        self.data.len()
    }

    fn loss(&self, params: &[f64], batch: &[usize]) -> Result<f64> {
        self.mlp.loss_raw(params, &Batch::new(self.data, batch), &self.loss)
    }

    fn grad(&self, params: &[f64], batch: &[usize]) -> Result<GradReport> {
        self.mlp.grad_raw(params, &Batch::new(self.data, batch), &self.loss)
    }

    fn per_example_grads(&self, params: &[f64], batch: &[usize]) -> Result<Vec<GradReport>> {
        self.mlp.per_example_raw(params, &Batch::new(self.data, batch), &self.loss)
    }
}
