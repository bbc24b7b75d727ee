//! Input file formats.
//!
//! * Sample id files: one id per line, `#` comments and blank lines
//!   ignored, optional `sample_id` header.
//! * Label CSV (`sample_id,label`): hard predictions and ground truth;
//!   header optional.
//! * Soft predictions: JSONL, one `{"sample_id": ..., "probs": [...]}`
//!   object per line, chosen by the `.jsonl` extension.
//! * Prior: whitespace- or comma-separated floats.
//! * Confusion CSV: K rows of K comma-separated floats, row index =
//!   predicted class, column index = true class; columns must sum to 1
//!   within 1e-6 and are renormalized exactly on load.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use relabel_core::types::{ClassId, ConfusionMatrix, Prediction, PredictionBatch, Prior, SampleId};

use crate::error::{CliError, CliResult};

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Sample ids, one per line. Duplicates are reported by name.
pub fn read_sample_ids(path: &Path) -> CliResult<Vec<SampleId>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line_no, line) in data_lines(&text) {
        if line_no == 1 && line == "sample_id" {
            continue;
        }
        let id = SampleId::new(line)
            .map_err(|e| CliError::data(format!("{}:{line_no}: {e}", path.display())))?;
        if !seen.insert(id.clone()) {
            return Err(CliError::data(format!(
                "{}:{line_no}: duplicate sample id {id}",
                path.display()
            )));
        }
        out.push(id);
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no sample ids", path.display())));
    }
    Ok(out)
}

/// `sample_id,label` rows into a map, labels checked against `k`.
pub fn read_label_map(path: &Path, k: usize) -> CliResult<BTreeMap<SampleId, ClassId>> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (line_no, line) in data_lines(&text) {
        if line_no == 1 && (line == "sample_id,label" || line == "sample_id, label") {
            continue;
        }
        let (raw_id, raw_label) = line.split_once(',').ok_or_else(|| {
            CliError::data(format!(
                "{}:{line_no}: expected `sample_id,label`",
                path.display()
            ))
        })?;
        let id = SampleId::new(raw_id.trim())
            .map_err(|e| CliError::data(format!("{}:{line_no}: {e}", path.display())))?;
        let label: usize = raw_label.trim().parse().map_err(|_| {
            CliError::data(format!(
                "{}:{line_no}: bad label {raw_label:?}",
                path.display()
            ))
        })?;
        if label >= k {
            return Err(CliError::data(format!(
                "{}:{line_no}: label {label} out of range for {k} classes",
                path.display()
            )));
        }
        if out.insert(id, ClassId(label)).is_some() {
            return Err(CliError::data(format!(
                "{}:{line_no}: duplicate sample id {raw_id}",
                path.display()
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no labels", path.display())));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct SoftRow {
    sample_id: String,
    probs: Vec<f64>,
}

/// Predictions: hard-label CSV, or soft-label JSONL when the path ends in
/// `.jsonl`.
pub fn read_predictions(path: &Path, k: usize, step: u64) -> CliResult<PredictionBatch> {
    let mut batch = PredictionBatch::new(step);
    if path.extension().is_some_and(|e| e == "jsonl") {
        let text = read_text(path)?;
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: SoftRow = serde_json::from_str(line).map_err(|e| {
                CliError::data(format!("{}:{}: {e}", path.display(), line_no + 1))
            })?;
            let id = SampleId::new(row.sample_id)
                .map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), line_no + 1)))?;
            let pred = Prediction::Soft(row.probs);
            pred.validate(k)
                .map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), line_no + 1)))?;
            if batch.entries.insert(id.clone(), pred).is_some() {
                return Err(CliError::data(format!(
                    "{}:{}: duplicate sample id {id}",
                    path.display(),
                    line_no + 1
                )));
            }
        }
        if batch.entries.is_empty() {
            return Err(CliError::data(format!("{}: no predictions", path.display())));
        }
    } else {
        for (id, label) in read_label_map(path, k)? {
            batch.entries.insert(id, Prediction::Hard(label));
        }
    }
    Ok(batch)
}

/// Explicit prior: floats separated by commas or whitespace.
pub fn read_prior(path: &Path, k: usize) -> CliResult<Prior> {
    let text = read_text(path)?;
    let mut values = Vec::new();
    for raw in text.split([',', '\n', '\r', ' ', '\t']) {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        values.push(raw.parse::<f64>().map_err(|_| {
            CliError::data(format!("{}: bad prior entry {raw:?}", path.display()))
        })?);
    }
    if values.len() != k {
        return Err(CliError::data(format!(
            "{}: prior has {} entries, expected {k}",
            path.display(),
            values.len()
        )));
    }
    Ok(Prior::Explicit(values))
}

/// Load a confusion CSV; columns are validated within 1e-6 and
/// renormalized exactly.
pub fn load_cm(path: &Path, expected_k: Option<usize>) -> CliResult<ConfusionMatrix> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    CliError::data(format!(
                        "{}:{line_no}: unparsable cell {cell:?}",
                        path.display()
                    ))
                })
            })
            .collect::<CliResult<_>>()?;
        rows.push(row);
    }
    let k = rows.len();
    if let Some(expected) = expected_k {
        if k != expected || rows.iter().any(|r| r.len() != expected) {
            return Err(CliError::data(format!(
                "{}: expected a {expected}x{expected} matrix, found {k} rows of {:?} columns",
                path.display(),
                rows.iter().map(|r| r.len()).collect::<Vec<_>>()
            )));
        }
    }
    ConfusionMatrix::from_rows_renormalized(rows, 1e-6)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Write a confusion CSV with round-trip float precision.
pub fn save_cm(cm: &ConfusionMatrix, path: &Path) -> CliResult<()> {
    let mut out = String::new();
    for row in cm.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
