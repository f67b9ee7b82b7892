use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear warmup to `peak_lr`, then cosine annealing toward zero over
/// `anneal_horizon` steps. Training may stop before the anneal completes
/// (`total_steps < warmup_steps + anneal_horizon`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub peak_lr: f64,
    pub warmup_steps: u64,
    pub anneal_horizon: u64,
    pub total_steps: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            peak_lr: 0.4,
            warmup_steps: 400,
            anneal_horizon: 4000,
            total_steps: 3000,
        }
    }
}

impl Schedule {
    /// Default shape rescaled to `total_steps`: warmup and horizon keep their
    /// 400 : 4000 : 3000 proportions to the step budget.
    pub fn scaled(peak_lr: f64, total_steps: u64) -> Self {
        Self {
            peak_lr,
            warmup_steps: (total_steps * 400).div_ceil(3000),
            anneal_horizon: (total_steps * 4000).div_ceil(3000),
            total_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_lr > 0.0 && self.peak_lr.is_finite()) {
            return Err(Error::config(format!("peak_lr must be positive, got {}", self.peak_lr)));
        }
        if self.anneal_horizon == 0 {
            return Err(Error::config("anneal_horizon must be positive"));
        }
        if self.warmup_steps >= self.total_steps {
            return Err(Error::config(format!(
                "warmup_steps {} must be below total_steps {}",
                self.warmup_steps, self.total_steps
            )));
        }
        if self.total_steps > self.warmup_steps + self.anneal_horizon {
            return Err(Error::config(format!(
                "total_steps {} exceeds warmup_steps + anneal_horizon = {}",
                self.total_steps,
                self.warmup_steps + self.anneal_horizon
            )));
        }
        Ok(())
    }
}

/// Learning rate at `step` in `0..=total_steps`.
pub fn lr_at(step: u64, s: &Schedule) -> Result<f64> {
    if step > s.total_steps {
        return Err(Error::Usage(format!("step {step} beyond total_steps {}", s.total_steps)));
    }
    if step <= s.warmup_steps && s.warmup_steps > 0 {
        return Ok(s.peak_lr * step as f64 / s.warmup_steps as f64);
    }
    let progress = (step - s.warmup_steps) as f64 / s.anneal_horizon as f64;
    Ok(s.peak_lr * 0.5 * (1.0 + (PI * progress).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_step() {
        assert!(matches!(lr_at(3001, &Schedule::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn continuous_at_boundary() {
        let s = Schedule::default();
        let warm = s.peak_lr * s.warmup_steps as f64 / s.warmup_steps as f64;
        let cos = s.peak_lr * 0.5 * (1.0 + 0.0f64.cos());
        assert_eq!(warm, cos);
        assert_eq!(lr_at(400, &s).unwrap(), 0.4);
        assert!((lr_at(401, &s).unwrap() - 0.4).abs() < 1e-6);
    }

    #[test]
    fn no_warmup() {
        let s = Schedule {
            peak_lr: 1.0,
            warmup_steps: 0,
            anneal_horizon: 10,
            total_steps: 10,
        };
        assert_eq!(lr_at(0, &s).unwrap(), 1.0);
        assert!(lr_at(10, &s).unwrap().abs() < 1e-15);
    }

    #[test]
    fn invariants_checked() {
        assert!(Schedule::default().validate().is_ok());
        let bad = Schedule {
            total_steps: 5000,
            ..Schedule::default()
        };
        assert!(bad.validate().is_err());
        let bad = Schedule {
            warmup_steps: 3000,
            ..Schedule::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn scaled_shapes_are_valid() {
        for total in [10, 60, 600, 1920, 3000] {
            let s = Schedule::scaled(0.4, total);
            s.validate().unwrap();
        }
        assert_eq!(Schedule::scaled(0.4, 3000), Schedule::default());
    }
}
