use super::{check_batch, GradReport, Objective};
use crate::error::{Error, Result};

/// Least squares `½‖Aθ − b‖²` written as a mean over the rows of `A`.
///
/// Row `i` contributes `(m/2)·(aᵢ·θ − bᵢ)²` with `m` the row count, so the
/// full-batch mean is exactly `½‖Aθ − b‖²` with gradient `Aᵀ(Aθ − b)` and
/// Hessian `AᵀA`. Used as the closed-form fixture for the finite-difference
/// machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    a: Vec<f64>,
    b: Vec<f64>,
    cols: usize,
}

impl QuadraticObjective {
    pub fn new(a: Vec<f64>, b: Vec<f64>, cols: usize) -> Result<Self> {
        if cols == 0 || b.is_empty() || a.len() != b.len() * cols {
            return Err(Error::shape(format!(
                "A has {} entries, expected {} rows x {cols} columns",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a, b, cols })
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    fn residual(&self, params: &[f64], i: usize) -> f64 {
        self.row(i).iter().zip(params).map(|(a, t)| a * t).sum::<f64>() - self.b[i]
    }

    /// `AᵀA`, row-major.
    pub fn hessian(&self) -> Vec<f64> {
        let p = self.cols;
        let mut h = vec![0.0; p * p];
        for i in 0..self.rows() {
            let r = self.row(i);
            for j in 0..p {
                for k in 0..p {
                    h[j * p + k] += r[j] * r[k];
                }
            }
        }
        h
    }

    fn check(&self, params: &[f64], batch: &[usize]) -> Result<()> {
        if params.len() != self.cols {
            return Err(Error::shape(format!("expected {} parameters, got {}", self.cols, params.len())));
        }
        check_batch(batch, self.rows())
    }
}

impl Objective for QuadraticObjective {
    fn param_count(&self) -> usize {
        self.cols
    }

    fn example_count(&self) -> usize {
        self.rows()
    }

    fn loss(&self, params: &[f64], batch: &[usize]) -> Result<f64> {
        self.check(params, batch)?;
        let m = self.rows() as f64;
        let total: f64 = batch
            .iter()
            .map(|&i| {
                let r = self.residual(params, i);
                0.5 * m * r * r
            })
            .sum();
        Ok(total / batch.len() as f64)
    }

    fn grad(&self, params: &[f64], batch: &[usize]) -> Result<GradReport> {
        self.check(params, batch)?;
        let m = self.rows() as f64;
        let mut g = vec![0.0; self.cols];
        let mut total = 0.0;
        for &i in batch {
            let r = self.residual(params, i);
            total += 0.5 * m * r * r;
            for (gj, aj) in g.iter_mut().zip(self.row(i)) {
                *gj += m * r * aj;
            }
        }
        let n = batch.len() as f64;
        for v in &mut g {
            *v /= n;
        }
        Ok(GradReport {
            grad: g,
            loss: total / n,
            count: batch.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_batch_is_least_squares() {
        // A = [[1, 2], [3, 4], [0, 1]], b = [1, 0, 2], θ = [0.5, -1]
        let q = QuadraticObjective::new(vec![1.0, 2.0, 3.0, 4.0, 0.0, 1.0], vec![1.0, 0.0, 2.0], 2).unwrap();
        let theta = [0.5, -1.0];
        // residuals: 0.5-2-1 = -2.5, 1.5-4 = -2.5, -1-2 = -3
        let all = q.all_indices();
        let loss = q.loss(&theta, &all).unwrap();
        assert!((loss - 0.5 * (6.25 + 6.25 + 9.0)).abs() < 1e-12);
        let g = q.grad(&theta, &all).unwrap().grad;
        // Aᵀr = [1*-2.5 + 3*-2.5 + 0, 2*-2.5 + 4*-2.5 + 1*-3]
        assert!((g[0] - (-10.0)).abs() < 1e-12);
        assert!((g[1] - (-18.0)).abs() < 1e-12);
        assert_eq!(q.hessian(), vec![10.0, 14.0, 14.0, 21.0]);
    }
}
