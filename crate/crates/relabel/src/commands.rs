//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use relabel_core::metrics;
use relabel_core::sim;
use relabel_core::strategy::{self, SelectionPolicy, UpdateRule};
use relabel_core::types::{ClassId, Prior, SampleId};
use relabel_core::LabelStore;

use crate::error::{CliError, CliResult};
use crate::formats;
use crate::report;
use crate::scenario;
use crate::state;

pub fn cmd_init(
    classes: usize,
    samples: &Path,
    prior: Option<&Path>,
    out: &Path,
) -> CliResult<()> {
    if classes < 2 {
        return Err(CliError::usage(format!(
            "--classes must be at least 2, got {classes}"
        )));
    }
    let ids = formats::read_sample_ids(samples)?;
    let prior = match prior {
        Some(path) => formats::read_prior(path, classes)?,
        None => Prior::Uniform,
    };
    let store = LabelStore::new(classes, ids, &prior)?;
    state::save_store(&store, out)?;
    eprintln!(
        "initialized {} samples over {classes} classes -> {}",
        store.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_ingest(
    state_path: &Path,
    predictions: &Path,
    confusion: &Path,
    budget: f64,
    select: &str,
    update: &str,
    truth: Option<&Path>,
    out: Option<&Path>,
    metrics_out: Option<&Path>,
) -> CliResult<()> {
    let select = SelectionPolicy::parse(select)
        .map_err(|e| CliError::usage(format!("--select: {e}")))?;
    let rule =
        UpdateRule::parse(update).map_err(|e| CliError::usage(format!("--update: {e}")))?;
    if rule == UpdateRule::Oracle && truth.is_none() {
        return Err(CliError::usage("--update oracle requires --truth"));
    }
    if metrics_out.is_some() && truth.is_none() {
        return Err(CliError::usage("--metrics-out requires --truth"));
    }

    let mut store = state::load_store(state_path)?;
    let k = store.k();
    let batch = formats::read_predictions(predictions, k, store.step())?;
    let cm = formats::load_cm(confusion, Some(k))?;
    let truth_map = truth
        .map(|p| formats::read_label_map(p, k))
        .transpose()?;
    let policy = rule.resolve(truth_map.as_ref())?;

    let labels_before = store.stored_labels();
    let initializing = store.step() == 0;
    let outcome = if initializing {
        strategy::initialize_with(&mut store, &batch, &cm)?
    } else {
        let budget = strategy::resolve_budget(budget, store.len())
            .map_err(|e| CliError::usage(format!("--budget: {e}")))?;
        strategy::run_step(&mut store, &batch, &cm, &select, &policy, budget)?
    };
    let time_index = store.step() - 1;

    state::save_store(&store, out.unwrap_or(state_path))?;
    eprintln!(
        "step {time_index}: re-evaluated {}, changed {}",
        outcome.selected.len(),
        outcome.changed.len()
    );

    if let Some(truth_map) = truth_map {
        let labels_after = store.stored_labels();
        if initializing {
            let accuracy = metrics::accuracy(&labels_after, &truth_map)?;
            match metrics_out {
                Some(path) => report::append_initial_row(path, accuracy)?,
                None => println!("{}\n{}", report::METRICS_HEADER, report::initial_row(accuracy)),
            }
        } else {
            let m =
                metrics::step_metrics(&labels_before, &labels_after, &truth_map, time_index)?;
            match metrics_out {
                Some(path) => report::append_step_metrics(path, &m)?,
                None => println!(
                    "{}\n{},{},{},{},{},{},{},{}",
                    report::METRICS_HEADER,
                    m.step,
                    m.accuracy,
                    m.nf,
                    m.pf,
                    m.neutral_flips,
                    m.nf,
                    m.btc,
                    m.bec
                ),
            }
        }
    }
    Ok(())
}

pub fn cmd_estimate(
    predictions: &Path,
    truth: &Path,
    classes: usize,
    mode: &str,
    out: &Path,
) -> CliResult<()> {
    if classes < 2 {
        return Err(CliError::usage(format!(
            "--classes must be at least 2, got {classes}"
        )));
    }
    let preds_map = formats::read_label_map(predictions, classes)?;
    let truth_map = formats::read_label_map(truth, classes)?;
    if preds_map.len() != truth_map.len() {
        return Err(CliError::data(format!(
            "prediction and truth files disagree: {} vs {} rows",
            preds_map.len(),
            truth_map.len()
        )));
    }
    let mut preds = Vec::with_capacity(preds_map.len());
    let mut truths = Vec::with_capacity(truth_map.len());
    for (id, p) in &preds_map {
        let t = truth_map.get(id).ok_or_else(|| {
            CliError::data(format!("sample {id} has a prediction but no truth entry"))
        })?;
        preds.push(*p);
        truths.push(*t);
    }
    let cm = match mode {
        "diagonal" => relabel_core::confusion::estimate_diagonal(&preds, &truths, classes)?,
        "laplace" => relabel_core::confusion::estimate_full_laplace(&preds, &truths, classes)?,
        other => {
            return Err(CliError::usage(format!(
                "--mode must be `diagonal` or `laplace`, got {other:?}"
            )))
        }
    };
    formats::save_cm(&cm, out)?;
    eprintln!("estimated {mode} confusion matrix -> {}", out.display());
    Ok(())
}

fn sanitize_label(label: &str) -> String {
    label.replace(':', "-")
}

pub fn cmd_simulate(scenario_path: &Path, out_dir: &Path) -> CliResult<()> {
    let parsed = scenario::load_scenario(scenario_path)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out_dir.display())))?;

    let budget_label = parsed.spec.budget_fraction.to_string();
    let mut summary = String::from(report::SUMMARY_HEADER);
    summary.push('\n');
    for select in &parsed.select_policies {
        let mut spec = parsed.spec.clone();
        spec.select_policy = select.clone();
        let result = sim::run_scenario(&spec)?;
        for (update_label, run) in &result.runs {
            let base = format!(
                "{}__{}",
                sanitize_label(&select.label()),
                sanitize_label(update_label)
            );
            report::write_run_metrics(&run.report, &out_dir.join(format!("{base}.metrics.csv")))?;
            let entropy_path = out_dir.join(format!("{base}.entropy.csv"));
            fs::write(&entropy_path, report::entropy_csv(&run.entropy_trace))
                .map_err(|e| CliError::data(format!("cannot write {}: {e}", entropy_path.display())))?;
            summary.push_str(&report::summary_row(
                &select.label(),
                update_label,
                &budget_label,
                &run.report,
            ));
            summary.push('\n');
        }
        eprintln!(
            "ran {} update policies under {} selection (budget {} of {})",
            result.runs.len(),
            select.label(),
            result.budget,
            spec.n_samples,
        );
    }
    let summary_path = out_dir.join("summary.csv");
    fs::write(&summary_path, summary)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", summary_path.display())))?;
    eprintln!("summary -> {}", summary_path.display());
    Ok(())
}

pub fn cmd_metrics(
    steps: &Path,
    n: usize,
    initial_accuracy: Option<f64>,
    label: &str,
    out: Option<&Path>,
) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let (initial_from_file, series) = report::read_steps_csv(steps)?;
    let initial = initial_accuracy.or(initial_from_file).ok_or_else(|| {
        CliError::usage(
            "initial accuracy unknown: no step-0 row in the file and no --initial-accuracy",
        )
    })?;
    let t = series.len();
    let report = metrics::finalize(series, initial, n, t)?;
    let mut text = String::from(report::SUMMARY_HEADER);
    text.push('\n');
    text.push_str(&report::summary_row("-", label, "-", &report));
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_export_entropy(state_path: &Path, out: &Path) -> CliResult<()> {
    let store = state::load_store(state_path)?;
    let mut text = String::from("sample_id,entropy,stored_label\n");
    for (id, rec) in store.records() {
        text.push_str(&format!("{id},{},{}\n", rec.entropy, rec.stored_label));
    }
    fs::write(out, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", out.display())))?;
    Ok(())
}

/// Shared by tests: run a scenario file the way `simulate` does and return
/// the per-policy reports keyed `(select_label, update_label)`.
pub fn run_scenario_file(
    scenario_path: &Path,
) -> CliResult<BTreeMap<(String, String), sim::PolicyRun>> {
    let parsed = scenario::load_scenario(scenario_path)?;
    let mut out = BTreeMap::new();
    for select in &parsed.select_policies {
        let mut spec = parsed.spec.clone();
        spec.select_policy = select.clone();
        let result = sim::run_scenario(&spec)?;
        for (update_label, run) in result.runs {
            out.insert((select.label(), update_label), run);
        }
    }
    Ok(out)
}

/// Shared by `ingest`-style tests: current stored labels of a state file.
pub fn stored_labels(state_path: &Path) -> CliResult<BTreeMap<SampleId, ClassId>> {
    Ok(state::load_store(state_path)?.stored_labels())
}
