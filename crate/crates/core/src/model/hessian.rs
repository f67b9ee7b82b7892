use rayon::prelude::*;

use super::Objective;
use crate::error::{Error, Result};

/// Largest parameter count the dense oracle accepts.
pub const HESSIAN_PARAM_CAP: usize = 512;

/// Relative step of the central differences: `h_i = STEP · (1 + |θ_i|)`.
const STEP: f64 = 1e-5;

/// Dense symmetric Hessian estimate, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    pub dim: usize,
    pub matrix: Vec<f64>,
    /// `max |H − Hᵀ|` of the raw difference quotients, before symmetrization.
    pub max_asymmetry: f64,
}

impl Hessian {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(h, x)| h * x).sum())
            .collect()
    }
}

/// Hessian of the mean loss over `batch` by central differences of the
/// analytic gradient, one coordinate at a time, then `(H + Hᵀ)/2`.
///
/// Tiny instances only: refuses more than [`HESSIAN_PARAM_CAP`] parameters.
pub fn hessian_oracle<O: Objective + ?Sized>(obj: &O, params: &[f64], batch: &[usize]) -> Result<Hessian> {
    let p = obj.param_count();
    if p > HESSIAN_PARAM_CAP {
        return Err(Error::OracleTooLarge {
            params: p,
            cap: HESSIAN_PARAM_CAP,
        });
    }
    if params.len() != p {
        return Err(Error::shape(format!("expected {p} parameters, got {}", params.len())));
    }

    let rows: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let h = STEP * (1.0 + params[i].abs());
            let (up, down) = (params[i] + h, params[i] - h);
            let mut shifted = params.to_vec();
            shifted[i] = up;
            let plus = obj.grad(&shifted, batch)?.grad;
            shifted[i] = down;
            let minus = obj.grad(&shifted, batch)?.grad;
            // realized step, so rounding of θ ± h does not bias the quotient
            let width = up - down;
            Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / width).collect())
        })
        .collect::<Result<_>>()?;

    let mut raw = Vec::with_capacity(p * p);
    for r in &rows {
        raw.extend_from_slice(r);
    }
    let mut max_asymmetry = 0.0f64;
    let mut matrix = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let (a, b) = (raw[i * p + j], raw[j * p + i]);
            max_asymmetry = max_asymmetry.max((a - b).abs());
            matrix[i * p + j] = 0.5 * (a + b);
        }
    }
    Ok(Hessian {
        dim: p,
        matrix,
        max_asymmetry,
    })
}
