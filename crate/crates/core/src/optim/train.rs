use super::{
    accumulate_blocks, chunk_indices, clip_in_place, inject_noise, lr_at, nesterov_update, MomentumState,
};
use crate::data::{plan_epoch, BatchPlan, Dataset};
use crate::error::{Error, Result};
use crate::harness::{Abort, RunLog, StepRecord, TrainConfig, ValRecord};
use crate::model::{init_model, MlpObjective, ModelSpec, Objective, ParamVector};
use crate::optim::NoiseConfig;
use crate::reg::penalty_grad_with;
use crate::vecmath::{all_finite, axpy, norm, norm_sq};

/// Runs `cfg.schedule.total_steps` updates on `train` and evaluates on `val`
/// every `cfg.eval_every` steps and at the last step.
///
/// A non-finite loss, gradient or parameter ends the run early; the returned
/// log then carries the abort step and cause instead of an error.
pub fn train(cfg: &TrainConfig, train: &Dataset, val: Option<&Dataset>) -> Result<RunLog> {
    train_with(cfg, train, val, |_, _| {})
}

/// As [`train`], calling `observe(step, params)` after every completed step.
/// The observer sees the parameters read-only.
pub fn train_with<F>(cfg: &TrainConfig, train: &Dataset, val: Option<&Dataset>, mut observe: F) -> Result<RunLog>
where
    F: FnMut(u64, &ParamVector),
{
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    let seeds = cfg.seeds();
    let spec = ModelSpec {
        init_seed: seeds.init,
        ..cfg.model.clone()
    };
    let obj = MlpObjective::new(&spec, train, cfg.loss)?;
    if let Some(v) = val {
        obj.mlp.check_data(v)?;
    }
    let init = init_model(&spec)?;
    let mut best_acc = f64::NEG_INFINITY;
    let mut log = run_steps(cfg, &obj, init, |step, params, log| {
        observe(step, params);
        if step % cfg.eval_every != 0 && step != cfg.schedule.total_steps {
            return Ok(());
        }
        let Some(v) = val else { return Ok(()) };
        let (val_loss, val_acc) = obj.mlp.evaluate(params.values(), v, &cfg.loss)?;
        log.validation.push(ValRecord { step, val_loss, val_acc });
        if val_acc > best_acc {
            best_acc = val_acc;
            log.summary.best_val_acc = Some(val_acc);
            log.summary.best_val_step = Some(step);
            if cfg.snapshot_policy.keeps_best() {
                log.best = Some(params.clone());
            }
        }
        Ok(())
    })?;

    if !log.aborted() {
        if let Some(last) = &log.last {
            let (loss, acc) = obj.mlp.evaluate(last.values(), train, &cfg.loss)?;
            log.summary.final_train_loss = Some(loss);
            log.summary.final_train_acc = Some(acc);
        }
        if let Some(last) = log.validation.last() {
            log.summary.final_val_loss = Some(last.val_loss);
            log.summary.final_val_acc = Some(last.val_acc);
        }
    }
    if !cfg.snapshot_policy.keeps_last() {
        log.last = None;
    }
    Ok(log)
}

/// The optimizer loop of [`train`] on an arbitrary objective, starting from
/// `init`. Model, dataset, evaluation and snapshot settings of `cfg` are
/// ignored; `log.last` always holds the final parameters.
pub fn optimize<O: Objective + ?Sized>(cfg: &TrainConfig, obj: &O, init: ParamVector) -> Result<RunLog> {
    let mut log = run_steps(cfg, obj, init, |_, _, _| Ok(()))?;
    if let Some(last) = &log.last {
        if !log.aborted() {
            log.summary.final_train_loss = Some(obj.loss(last.values(), &obj.all_indices())?);
        }
    }
    Ok(log)
}

fn run_steps<O, F>(cfg: &TrainConfig, obj: &O, init: ParamVector, mut after_step: F) -> Result<RunLog>
where
    O: Objective + ?Sized,
    F: FnMut(u64, &ParamVector, &mut RunLog) -> Result<()>,
{
    cfg.schedule.validate()?;
    cfg.optimizer.validate()?;
    if init.len() != obj.param_count() {
        return Err(Error::shape(format!(
            "initial parameters have length {}, objective expects {}",
            init.len(),
            obj.param_count()
        )));
    }
    let seeds = cfg.seeds();
    let n = obj.example_count();
    let plan = BatchPlan {
        seed: seeds.plan,
        ..cfg.batch_plan
    };
    plan.validate(n)?;
    let noise = NoiseConfig {
        seed: seeds.noise,
        ..cfg.noise
    };
    let blocks_per_epoch = plan.blocks_per_epoch(n) as u64;
    let chunk = cfg.reg.map_or(cfg.accumulation_block, |r| r.block_size);

    let mut params = init;
    let mut state = MomentumState::new(params.len(), cfg.optimizer);
    let mut log = RunLog::default();
    let mut epoch_blocks: Vec<Vec<usize>> = Vec::new();
    let mut current_epoch = None;

    for k in 0..cfg.schedule.total_steps {
        let step = k + 1;
        let epoch = k / blocks_per_epoch;
        if current_epoch != Some(epoch) {
            epoch_blocks = plan_epoch(&plan, n, epoch)?;
            current_epoch = Some(epoch);
        }
        let batch = &epoch_blocks[(k % blocks_per_epoch) as usize];
        let lr = lr_at(step, &cfg.schedule)?;

        let outcome = (|| -> Result<StepRecord> {
            let theta = params.values();
            let chunks = chunk_indices(batch, chunk);
            let (g, parts) = accumulate_blocks(obj, theta, &chunks)?;
            let mut direction = g.grad;
            let mut penalty = None;
            if let Some(reg) = &cfg.reg {
                let rep = penalty_grad_with(obj, theta, &chunks, &parts, reg, lr)?;
                axpy(1.0, &rep.grad, &mut direction);
                penalty = Some(rep);
            }
            if !noise.is_identity() {
                direction = inject_noise(&direction, &noise, step);
            }
            let grad_norm_pre = norm(&direction);
            if !grad_norm_pre.is_finite() {
                return Err(Error::numeric(format!("gradient norm {grad_norm_pre}")));
            }
            let clipped = match &cfg.clip {
                Some(c) => clip_in_place(&mut direction, c)?,
                None => false,
            };
            let grad_norm_post = norm(&direction);
            let full_loss = g.loss
                + 0.5 * cfg.optimizer.weight_decay * norm_sq(theta)
                + penalty.as_ref().map_or(0.0, |p| p.coefficient * p.value);
            if !full_loss.is_finite() {
                return Err(Error::numeric(format!("full loss {full_loss}")));
            }
            let rec = StepRecord {
                step,
                lr,
                train_loss: g.loss,
                full_loss,
                grad_norm_pre,
                grad_norm_post,
                clipped,
                penalty_value: penalty.map(|p| p.value),
            };
            nesterov_update(params.values_mut(), &mut state, &direction, lr)?;
            if !all_finite(params.values()) {
                return Err(Error::numeric("parameters became non-finite"));
            }
            Ok(rec)
        })();

        match outcome {
            Ok(rec) => {
                log.summary.clipped_steps += u64::from(rec.clipped);
                log.steps.push(rec);
                log.summary.steps_completed = step;
            }
            Err(Error::Numeric(cause)) => {
                log.summary.abort = Some(Abort { step, cause });
                break;
            }
            Err(e) => return Err(e),
        }
        match after_step(step, &params, &mut log) {
            Ok(()) => {}
            Err(Error::Numeric(cause)) => {
                log.summary.abort = Some(Abort { step, cause });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    log.last = Some(params);
    Ok(log)
}
