//! Per-run `summary.json` files and their aggregation across seeds.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RunSummary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Seconds since the Unix epoch when the file was written.
    pub written_at: u64,
    pub crate_version: String,
}

impl RunMetadata {
    pub fn now() -> Self {
        let written_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        RunMetadata {
            written_at,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummaryFile {
    pub summary: RunSummary,
    pub metadata: RunMetadata,
}

pub fn write_run_summary(summary: &RunSummary, path: impl AsRef<Path>) -> Result<()> {
    let file = RunSummaryFile {
        summary: summary.clone(),
        metadata: RunMetadata::now(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn read_run_summary(path: impl AsRef<Path>) -> Result<RunSummary> {
    let file: RunSummaryFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(file.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` with fewer than two values.
    pub std: Option<f64>,
}

impl MetricStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Some(MetricStats { n, mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub aborted: usize,
    pub metrics: BTreeMap<String, MetricStats>,
}

const METRICS: [&str; 6] = [
    "final_train_loss",
    "final_train_acc",
    "final_val_loss",
    "final_val_acc",
    "best_val_acc",
    "clipped_steps",
];

fn metric(s: &RunSummary, name: &str) -> Option<f64> {
    match name {
        "final_train_loss" => s.final_train_loss,
        "final_train_acc" => s.final_train_acc,
        "final_val_loss" => s.final_val_loss,
        "final_val_acc" => s.final_val_acc,
        "best_val_acc" => s.best_val_acc,
        "clipped_steps" => Some(s.clipped_steps as f64),
        _ => None,
    }
}

/// Mean and sample std of each metric over the runs that report it. Input
/// order does not matter: summaries are sorted by their JSON form first.
pub fn aggregate(summaries: &[RunSummary]) -> Aggregate {
    let mut sorted: Vec<(String, &RunSummary)> = summaries
        .iter()
        .map(|s| (serde_json::to_string(s).expect("summary serializes"), s))
        .collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut metrics = BTreeMap::new();
    for name in METRICS {
        let values: Vec<f64> = sorted.iter().filter_map(|(_, s)| metric(s, name)).collect();
        if let Some(st) = MetricStats::of(&values) {
            metrics.insert(name.to_string(), st);
        }
    }
    Aggregate {
        runs: summaries.len(),
        aborted: summaries.iter().filter(|s| s.abort.is_some()).count(),
        metrics,
    }
}

/// Reads `summary.json` from each run directory and writes the aggregate as
/// `summary.json` and `summary.csv` under `out`.
pub fn summarize_dirs(dirs: &[PathBuf], out: &Path) -> Result<Aggregate> {
    if dirs.is_empty() {
        return Err(Error::Usage("summarize needs at least one run directory".into()));
    }
    let summaries = dirs
        .iter()
        .map(|d| read_run_summary(d.join("summary.json")))
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&summaries);
    fs::create_dir_all(out)?;
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&agg)?)?;
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    w.write_record(["metric", "n", "mean", "std"])?;
    for (name, st) in &agg.metrics {
        w.write_record([
            name.clone(),
            st.n.to_string(),
            format!("{:?}", st.mean),
            st.std.map(|s| format!("{s:?}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(acc: f64) -> RunSummary {
        RunSummary {
            steps_completed: 10,
            final_val_acc: Some(acc),
            best_val_acc: Some(acc),
            ..Default::default()
        }
    }

    #[test]
    fn mean_and_sample_std() {
        let agg = aggregate(&[run(0.8), run(0.9), run(1.0)]);
        let st = &agg.metrics["final_val_acc"];
        assert_eq!(st.n, 3);
        assert!((st.mean - 0.9).abs() < 1e-15);
        assert!((st.std.unwrap() - 0.1).abs() < 1e-12);
        assert!(!agg.metrics.contains_key("final_train_loss"));
    }

    #[test]
    fn order_does_not_matter() {
        let a = aggregate(&[run(0.1), run(0.7), run(0.35)]);
        let b = aggregate(&[run(0.35), run(0.1), run(0.7)]);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
