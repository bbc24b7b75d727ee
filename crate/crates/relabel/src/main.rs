use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relabel::commands;
use relabel::CliResult;

/// Maintain best-guess labels for an unlabelled dataset as classifiers
/// arrive over time: Bayesian posterior fusion, budgeted entropy-based
/// re-evaluation, and backward-compatible update rules.
#[derive(Parser)]
#[command(name = "relabel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a fresh label store from a sample id list.
    Init {
        /// Number of classes K.
        #[arg(long)]
        classes: usize,
        /// File with one sample id per line.
        #[arg(long)]
        samples: PathBuf,
        /// Explicit prior file (K floats); uniform when omitted.
        #[arg(long)]
        prior: Option<PathBuf>,
        /// Where to write the state snapshot.
        #[arg(long)]
        out: PathBuf,
    },
    /// Ingest one classifier's predictions into a state file.
    Ingest {
        #[arg(long)]
        state: PathBuf,
        /// Hard labels (`.csv`: sample_id,label) or soft labels (`.jsonl`).
        #[arg(long)]
        predictions: PathBuf,
        /// Confusion CSV for the classifier (rows = predicted class).
        #[arg(long)]
        confusion: PathBuf,
        /// Fraction of samples to re-evaluate, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        /// `entropy` or `random:<seed>`.
        #[arg(long, default_value = "entropy")]
        select: String,
        /// `replace`, `majority`, `mb`, `mbme`, `cr:<ratio>`, or `oracle`.
        #[arg(long)]
        update: String,
        /// Ground-truth CSV; enables the metrics row and the oracle.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Output state path; rewrites --state in place when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the step's metrics row to this CSV.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Estimate a confusion matrix from labelled predictions.
    Estimate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        classes: usize,
        /// `diagonal` or `laplace`.
        #[arg(long)]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a synthetic scenario file and write per-policy reports.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recompute a run summary from a step metrics CSV.
    Metrics {
        #[arg(long)]
        steps: PathBuf,
        /// Number of samples in the store (for the negative flip rate).
        #[arg(long)]
        n: usize,
        /// Accuracy after the initial batch; read from the step-0 row when
        /// omitted.
        #[arg(long)]
        initial_accuracy: Option<f64>,
        /// Strategy label for the summary row.
        #[arg(long, default_value = "-")]
        label: String,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export per-sample posterior entropies from a state file.
    ExportEntropy {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Init {
            classes,
            samples,
            prior,
            out,
        } => commands::cmd_init(classes, &samples, prior.as_deref(), &out),
        Command::Ingest {
            state,
            predictions,
            confusion,
            budget,
            select,
            update,
            truth,
            out,
            metrics_out,
        } => commands::cmd_ingest(
            &state,
            &predictions,
            &confusion,
            budget,
            &select,
            &update,
            truth.as_deref(),
            out.as_deref(),
            metrics_out.as_deref(),
        ),
        Command::Estimate {
            predictions,
            truth,
            classes,
            mode,
            out,
        } => commands::cmd_estimate(&predictions, &truth, classes, &mode, &out),
        Command::Simulate { scenario, out_dir } => commands::cmd_simulate(&scenario, &out_dir),
        Command::Metrics {
            steps,
            n,
            initial_accuracy,
            label,
            out,
        } => commands::cmd_metrics(&steps, n, initial_accuracy, &label, out.as_deref()),
        Command::ExportEntropy { state, out } => commands::cmd_export_entropy(&state, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
