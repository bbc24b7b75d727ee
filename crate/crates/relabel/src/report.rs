//! Metrics CSV, summary CSV, and entropy exports.
//!
//! Per-run metrics CSV: header `step,accuracy,nf,pf,neutral,cum_nf,btc,bec`.
//! The `step 0` row carries the accuracy right after the initial batch
//! (flip counters zero, compatibilities 1); rows 1..=T are update steps
//! with a running cumulative negative-flip column.
//!
//! Summary CSV: one row per (selection, update) run with the aggregate
//! columns in report order; the positive/negative flip ratio renders as
//! `-` when no negative flip ever occurred.

use std::fs;
use std::path::Path;

use relabel_core::metrics::{RunReport, StepMetrics};
use relabel_core::sim::EntropySnapshot;

use crate::error::{CliError, CliResult};

pub const METRICS_HEADER: &str = "step,accuracy,nf,pf,neutral,cum_nf,btc,bec";
pub const SUMMARY_HEADER: &str =
    "select,update,budget,avg_btc,avg_bec,acc,delta_acc,cum_nf,nfr,pf_nf";
pub const ENTROPY_HEADER: &str = "step,sample_id,entropy,stored_label,correct";

fn step_row(m: &StepMetrics, cum_nf: u64) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        m.step, m.accuracy, m.nf, m.pf, m.neutral_flips, cum_nf, m.btc, m.bec
    )
}

/// Initial-accuracy pseudo-row (time index 0).
pub fn initial_row(accuracy: f64) -> String {
    format!("0,{accuracy},0,0,0,0,1,1")
}

/// Full metrics CSV for one run.
pub fn run_metrics_csv(report: &RunReport) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    out.push_str(&initial_row(report.initial_accuracy));
    out.push('\n');
    let mut cum = 0u64;
    for m in &report.steps {
        cum += m.nf;
        out.push_str(&step_row(m, cum));
        out.push('\n');
    }
    out
}

pub fn write_run_metrics(report: &RunReport, path: &Path) -> CliResult<()> {
    fs::write(path, run_metrics_csv(report))
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Append one step row, creating the file with a header when missing. The
/// cumulative column continues from the file's last row.
pub fn append_step_metrics(path: &Path, m: &StepMetrics) -> CliResult<()> {
    let (mut text, last_cum) = match fs::read_to_string(path) {
        Ok(existing) => {
            let last_cum = existing
                .lines()
                .skip(1)
                .filter(|l| !l.trim().is_empty())
                .last()
                .and_then(|l| l.split(',').nth(5))
                .and_then(|c| c.parse::<u64>().ok())
                .unwrap_or(0);
            (existing, last_cum)
        }
        Err(_) => (format!("{METRICS_HEADER}\n"), 0),
    };
    text.push_str(&step_row(m, last_cum + m.nf));
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Append the initial-accuracy row.
pub fn append_initial_row(path: &Path, accuracy: f64) -> CliResult<()> {
    let mut text = match fs::read_to_string(path) {
        Ok(existing) => existing,
        Err(_) => format!("{METRICS_HEADER}\n"),
    };
    text.push_str(&initial_row(accuracy));
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Parse a metrics CSV back into the initial accuracy (from the step-0
/// row, when present) and the ordered update-step series.
pub fn read_steps_csv(path: &Path) -> CliResult<(Option<f64>, Vec<StepMetrics>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == METRICS_HEADER => {}
        other => {
            return Err(CliError::data(format!(
                "{}: expected header {METRICS_HEADER:?}, found {other:?}",
                path.display()
            )))
        }
    }
    let mut initial = None;
    let mut steps = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            return Err(CliError::data(format!(
                "{}:{}: expected 8 columns",
                path.display(),
                line_no + 2
            )));
        }
        let parse_err = |what: &str| {
            CliError::data(format!(
                "{}:{}: bad {what}",
                path.display(),
                line_no + 2
            ))
        };
        let step: u64 = cells[0].parse().map_err(|_| parse_err("step"))?;
        let accuracy: f64 = cells[1].parse().map_err(|_| parse_err("accuracy"))?;
        if step == 0 {
            initial = Some(accuracy);
            continue;
        }
        steps.push(StepMetrics {
            step,
            accuracy,
            nf: cells[2].parse().map_err(|_| parse_err("nf"))?,
            pf: cells[3].parse().map_err(|_| parse_err("pf"))?,
            neutral_flips: cells[4].parse().map_err(|_| parse_err("neutral"))?,
            btc: cells[6].parse().map_err(|_| parse_err("btc"))?,
            bec: cells[7].parse().map_err(|_| parse_err("bec"))?,
        });
    }
    steps.sort_by_key(|m| m.step);
    Ok((initial, steps))
}

pub fn summary_row(select: &str, update: &str, budget: &str, report: &RunReport) -> String {
    let pf_nf = match report.pf_nf_ratio {
        Some(r) => r.to_string(),
        None => "-".to_string(),
    };
    format!(
        "{select},{update},{budget},{},{},{},{},{},{},{pf_nf}",
        report.avg_btc,
        report.avg_bec,
        report.final_accuracy,
        report.delta_acc,
        report.cum_nf,
        report.nfr
    )
}

/// Per-step, per-sample entropy trace for one run.
pub fn entropy_csv(trace: &[EntropySnapshot]) -> String {
    let mut out = String::from(ENTROPY_HEADER);
    out.push('\n');
    for snap in trace {
        for row in &snap.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                snap.step,
                row.sample,
                row.entropy,
                row.stored,
                u8::from(row.correct)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relabel_core::metrics;

    fn step(step: u64, nf: u64) -> StepMetrics {
        StepMetrics {
            step,
            accuracy: 0.5 + step as f64 / 10.0,
            nf,
            pf: nf + 1,
            neutral_flips: 0,
            btc: 0.9,
            bec: 0.8,
        }
    }

    #[test]
    fn metrics_csv_round_trips_through_finalize() {
        let steps = vec![step(1, 2), step(2, 0)];
        let report = metrics::finalize(steps.clone(), 0.5, 10, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_run_metrics(&report, &path).unwrap();

        let (initial, parsed) = read_steps_csv(&path).unwrap();
        assert_eq!(initial, Some(0.5));
        assert_eq!(parsed, steps);
        let rebuilt = metrics::finalize(parsed, initial.unwrap(), 10, 2).unwrap();
        assert_eq!(rebuilt, report);
    }

    #[test]
    fn append_continues_cumulative_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        append_initial_row(&path, 0.5).unwrap();
        append_step_metrics(&path, &step(1, 2)).unwrap();
        append_step_metrics(&path, &step(2, 3)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("2,"));
        assert_eq!(last.split(',').nth(5), Some("5"));
    }

    #[test]
    fn summary_renders_undefined_ratio_as_dash() {
        let report = metrics::finalize(vec![], 0.5, 10, 0).unwrap();
        let row = summary_row("entropy", "oracle", "1", &report);
        assert!(row.ends_with(",-"));
    }
}
