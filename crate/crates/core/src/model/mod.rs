//! Differentiable models: a small MLP family with exact per-example gradients,
//! a quadratic test objective, and a finite-difference Hessian oracle.

mod hessian;
mod mlp;
mod quadratic;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use hessian::{hessian_oracle, Hessian, HESSIAN_PARAM_CAP};
pub use mlp::{Mlp, MlpObjective};
pub use quadratic::QuadraticObjective;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// Zero-mean, unit-variance rescaling of each hidden pre-activation vector,
    /// computed per example (no statistics shared across a batch).
    PerExampleNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Input dimension, hidden widths, class count.
    pub layer_widths: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub init_seed: u64,
}

impl ModelSpec {
    pub fn new(layer_widths: Vec<usize>) -> Self {
        Self {
            layer_widths,
            activation: Activation::Relu,
            normalization: Normalization::None,
            init_seed: 0,
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::config(format!(
                "layer_widths needs at least input and output widths, got {:?}",
                self.layer_widths
            )));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::config(format!("layer widths must be positive, got {:?}", self.layer_widths)));
        }
        if self.classes() < 2 {
            return Err(Error::config("the output layer needs at least 2 classes"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_widths.last().expect("validated")
    }

    /// Weight and bias segments in storage order.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(2 * (self.layer_widths.len() - 1));
        let mut offset = 0;
        for (layer, pair) in self.layer_widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            out.push(Segment {
                layer,
                kind: SegmentKind::Weight,
                rows: fan_out,
                cols: fan_in,
                offset,
            });
            offset += fan_in * fan_out;
            out.push(Segment {
                layer,
                kind: SegmentKind::Bias,
                rows: fan_out,
                cols: 1,
                offset,
            });
            offset += fan_out;
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layer_widths.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Weight,
    Bias,
}

/// A contiguous run of the flat parameter vector. Weights are stored
/// row-major as `rows = fan_out`, `cols = fan_in`, so a row is one unit's
/// incoming weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub layer: usize,
    pub kind: SegmentKind,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Flat `f64` parameters with the segment layout that partitions them.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    segments: Vec<Segment>,
}

impl ParamVector {
    pub fn from_values(spec: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let expected = spec.param_count();
        if values.len() != expected {
            return Err(Error::shape(format!(
                "model {:?} has {expected} parameters, got {}",
                spec.layer_widths,
                values.len()
            )));
        }
        Ok(Self {
            values,
            segments: spec.segments(),
        })
    }

    /// A single unstructured segment, for objectives that are not MLPs.
    pub fn flat(values: Vec<f64>) -> Self {
        let segments = vec![Segment {
            layer: 0,
            kind: SegmentKind::Weight,
            rows: 1,
            cols: values.len(),
            offset: 0,
        }];
        Self { values, segments }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Same layout, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::shape(format!(
                "expected {} values, got {}",
                self.values.len(),
                values.len()
            )));
        }
        Ok(Self {
            values,
            segments: self.segments.clone(),
        })
    }

    pub fn segment(&self, s: &Segment) -> &[f64] {
        &self.values[s.range()]
    }

    /// Bitwise equality, distinguishing `-0.0` from `0.0` and comparing NaN payloads.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Fan-in-scaled uniform initialization: weights of a layer with fan-in `k`
/// are drawn from `U(-b, b)` with `b = sqrt(6 / k)` for ReLU and
/// `b = sqrt(3 / k)` for tanh; biases start at zero.
pub fn init_model(spec: &ModelSpec) -> Result<ParamVector> {
    spec.validate()?;
    let mut rng = seed::rng(spec.init_seed);
    let gain = match spec.activation {
        Activation::Relu => 6.0,
        Activation::Tanh => 3.0,
    };
    let mut values = vec![0.0; spec.param_count()];
    for seg in spec.segments() {
        if seg.kind == SegmentKind::Weight {
            let bound = (gain / seg.cols as f64).sqrt();
            for v in &mut values[seg.range()] {
                *v = rng.random_range(-bound..bound);
            }
        }
    }
    ParamVector::from_values(spec, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    /// Softmax cross-entropy with targets `(1 - s)·onehot + s / classes`.
    #[serde(default)]
    pub label_smoothing: f64,
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.label_smoothing) {
            return Err(Error::config(format!(
                "label_smoothing must lie in [0, 0.5), got {}",
                self.label_smoothing
            )));
        }
        Ok(())
    }
}

/// A gradient together with the loss it came from and the number of
/// examples averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub grad: Vec<f64>,
    pub loss: f64,
    pub count: usize,
}

/// Mean-loss objective over indexed examples. Implementations must be pure:
/// equal inputs give bit-identical outputs.
pub trait Objective: Sync {
    fn param_count(&self) -> usize;

    fn example_count(&self) -> usize;

    /// Mean loss over `batch`.
    fn loss(&self, params: &[f64], batch: &[usize]) -> Result<f64>;

    /// Gradient of the mean loss over `batch`.
    fn grad(&self, params: &[f64], batch: &[usize]) -> Result<GradReport>;

    fn per_example_grads(&self, params: &[f64], batch: &[usize]) -> Result<Vec<GradReport>> {
        batch.iter().map(|i| self.grad(params, std::slice::from_ref(i))).collect()
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..self.example_count()).collect()
    }
}

pub(crate) fn check_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::shape("batch is empty"));
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= n) {
        return Err(Error::shape(format!("example index {bad} out of range for {n} examples")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_count_of_small_net() {
        let spec = ModelSpec::new(vec![2, 4, 2]);
        assert_eq!(spec.param_count(), 2 * 4 + 4 + 4 * 2 + 2);
        let segs = spec.segments();
        assert_eq!(segs.iter().map(Segment::len).sum::<usize>(), 22);
        assert_eq!(segs.last().unwrap().range().end, 22);
    }

    #[test]
    fn init_is_deterministic() {
        let spec = ModelSpec::new(vec![2, 4, 2]).with_seed(7);
        let a = init_model(&spec).unwrap();
        let b = init_model(&spec).unwrap();
        assert!(a.bit_eq(&b));
        assert_eq!(a.len(), 22);
    }

    #[test]
    fn seeds_change_init() {
        let a = init_model(&ModelSpec::new(vec![2, 4, 2]).with_seed(1)).unwrap();
        let b = init_model(&ModelSpec::new(vec![2, 4, 2]).with_seed(2)).unwrap();
        assert!(a.values().iter().zip(b.values()).any(|(x, y)| x != y));
    }

    #[test]
    fn invalid_widths() {
        assert!(matches!(init_model(&ModelSpec::new(vec![3])), Err(Error::Config(_))));
        assert!(matches!(init_model(&ModelSpec::new(vec![3, 0, 2])), Err(Error::Config(_))));
    }

    #[test]
    fn smoothing_range() {
        assert!(LossConfig { label_smoothing: 0.5 }.validate().is_err());
        assert!(LossConfig { label_smoothing: -0.1 }.validate().is_err());
        assert!(LossConfig { label_smoothing: 0.1 }.validate().is_ok());
    }
}
