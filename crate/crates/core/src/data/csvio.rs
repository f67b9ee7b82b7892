//! CSV dataset format: UTF-8, a header row, feature columns `f0..f{d-1}` and a
//! final integer `label` column.

use std::path::Path;

use super::{Dataset, Provenance};
use crate::error::{Error, Result};

/// Reads a dataset. Row order is preserved.
///
/// When `classes` is given, labels must lie in `[0, classes)`; otherwise the
/// class count is inferred as `max label + 1`. Row numbers in errors count the
/// header as row 1.
pub fn load_csv(path: impl AsRef<Path>, classes: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let load_err = |row: usize, message: String| Error::Load {
        path: path.to_path_buf(),
        row,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let width = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].trim().is_empty()) => h.len(),
        Ok(_) => return Err(load_err(1, "file is empty".into())),
        Err(e) => return Err(load_err(1, e.to_string())),
    };
    if width < 2 {
        return Err(load_err(1, format!("need at least one feature column and a label, got {width} columns")));
    }
    let dim = width - 1;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| load_err(row, e.to_string()))?;
        if record.len() != width {
            return Err(load_err(row, format!("expected {width} columns, found {}", record.len())));
        }
        for (c, field) in record.iter().take(dim).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| load_err(row, format!("column {c}: cannot parse {field:?} as a real")))?;
            features.push(v);
        }
        let raw = record[dim].trim();
        let y: usize = raw
            .parse()
            .map_err(|_| load_err(row, format!("label {raw:?} is not a nonnegative integer")))?;
        if let Some(k) = classes {
            if y >= k {
                return Err(load_err(row, format!("label {y} outside [0, {k})")));
            }
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(load_err(2, "no data rows".into()));
    }
    let classes = classes.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
    Dataset::new(features, labels, dim, classes, Provenance::File, 0)
}

/// Writes a dataset with header `f0,…,f{d-1},label`. Reals are written in
/// shortest round-trip form, so `load_csv(write_csv(ds))` recovers every bit.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..ds.dim()).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(ds.dim() + 1);
    for i in 0..ds.len() {
        record.clear();
        record.extend(ds.row(i).iter().map(|x| format!("{x:?}")));
        record.push(ds.label(i).to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
