use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ParamVector;

/// One optimizer step. `train_loss` is the mean loss of the step's batch at
/// the pre-update parameters (the full training loss in full-batch modes);
/// `full_loss` adds `(wd/2)·‖θ‖²` and the scaled penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub lr: f64,
    pub train_loss: f64,
    pub full_loss: f64,
    pub grad_norm_pre: f64,
    pub grad_norm_post: f64,
    pub clipped: bool,
    pub penalty_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValRecord {
    pub step: u64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub step: u64,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunSummary {
    pub steps_completed: u64,
    pub final_train_loss: Option<f64>,
    pub final_train_acc: Option<f64>,
    pub final_val_loss: Option<f64>,
    pub final_val_acc: Option<f64>,
    pub best_val_acc: Option<f64>,
    pub best_val_step: Option<u64>,
    pub clipped_steps: u64,
    pub abort: Option<Abort>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub steps: Vec<StepRecord>,
    pub validation: Vec<ValRecord>,
    pub summary: RunSummary,
    /// Parameters after the last completed step.
    pub last: Option<ParamVector>,
    /// Parameters at the best validation accuracy.
    pub best: Option<ParamVector>,
}

impl RunLog {
    pub fn aborted(&self) -> bool {
        self.summary.abort.is_some()
    }

    /// Writes `runlog.csv`.
    pub fn write_steps_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "step",
            "lr",
            "train_loss",
            "full_loss",
            "grad_norm_pre",
            "grad_norm_post",
            "clipped",
            "penalty_value",
        ])?;
        for r in &self.steps {
            w.write_record([
                r.step.to_string(),
                fmt(r.lr),
                fmt(r.train_loss),
                fmt(r.full_loss),
                fmt(r.grad_norm_pre),
                fmt(r.grad_norm_post),
                u8::from(r.clipped).to_string(),
                r.penalty_value.map(fmt).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `validation.csv`.
    pub fn write_validation_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["step", "val_loss", "val_acc"])?;
        for r in &self.validation {
            w.write_record([r.step.to_string(), fmt(r.val_loss), fmt(r.val_acc)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// Reads back a `runlog.csv`.
pub fn read_steps_csv(path: impl AsRef<Path>) -> Result<Vec<StepRecord>> {
    #[derive(Deserialize)]
    struct Row {
        step: u64,
        lr: f64,
        train_loss: f64,
        full_loss: f64,
        grad_norm_pre: f64,
        grad_norm_post: f64,
        clipped: u8,
        penalty_value: Option<f64>,
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(StepRecord {
                step: row.step,
                lr: row.lr,
                train_loss: row.train_loss,
                full_loss: row.full_loss,
                grad_norm_pre: row.grad_norm_pre,
                grad_norm_post: row.grad_norm_post,
                clipped: row.clipped != 0,
                penalty_value: row.penalty_value,
            })
        })
        .collect()
}

/// Reads back a `validation.csv`.
pub fn read_validation_csv(path: impl AsRef<Path>) -> Result<Vec<ValRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize::<ValRecord>().collect::<std::result::Result<_, _>>()?)
}
