//! End-to-end tests of the binary: exit codes (0 success, 2 argument
//! error, 3 data/format error, 4 numerical error), file formats, and the
//! init -> ingest -> metrics round trip.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

struct Ws {
    dir: tempfile::TempDir,
}

impl Ws {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_relabel"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn setup_initialized(ws: &Ws) {
    ws.write("ids.txt", "a\nb\nc\nd\n");
    ws.write("cm.csv", "0.9,0.1\n0.1,0.9\n");
    ws.write("preds0.csv", "sample_id,label\na,0\nb,1\nc,0\nd,1\n");
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--out", "state.txt",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds0.csv",
        "--confusion",
        "cm.csv",
        "--update",
        "mb",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn init_rejects_duplicate_ids_naming_them() {
    let ws = Ws::new();
    ws.write("ids.txt", "a\nb\na\n");
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--out", "state.txt",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("duplicate sample id a"), "{}", stderr(&out));
    assert!(!ws.path("state.txt").exists());
}

#[test]
fn init_rejects_wrong_prior_dimension() {
    let ws = Ws::new();
    ws.write("ids.txt", "a\nb\n");
    ws.write("prior.csv", "0.5,0.3,0.2\n");
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--prior", "prior.csv", "--out",
        "state.txt",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("3 entries, expected 2"));
}

#[test]
fn ingest_budget_fraction_floors() {
    let ws = Ws::new();
    let ids: String = (0..1000).map(|i| format!("s{i:04}\n")).collect();
    ws.write("ids.txt", &ids);
    ws.write("cm.csv", "0.9,0.1\n0.1,0.9\n");
    let preds: String = (0..1000).map(|i| format!("s{i:04},{}\n", i % 2)).collect();
    ws.write("preds.csv", &preds);
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--out", "state.txt",
    ]);
    assert_eq!(code(&out), 0);
    // First batch initializes everything.
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds.csv",
        "--confusion",
        "cm.csv",
        "--update",
        "mb",
    ]);
    assert!(stderr(&out).contains("re-evaluated 1000"));
    // Second batch honours the fractional budget.
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds.csv",
        "--confusion",
        "cm.csv",
        "--update",
        "mb",
        "--budget",
        "0.1",
    ]);
    assert_eq!(code(&out), 0);
    assert!(
        stderr(&out).contains("re-evaluated 100,"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn ingest_policy_argument_errors_exit_2() {
    let ws = Ws::new();
    setup_initialized(&ws);
    let base = [
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds0.csv",
        "--confusion",
        "cm.csv",
    ];
    let mut args = base.to_vec();
    args.extend(["--update", "cr:0"]);
    let out = ws.run(&args);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let mut args = base.to_vec();
    args.extend(["--update", "oracle"]);
    let out = ws.run(&args);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("requires --truth"));

    let mut args = base.to_vec();
    args.extend(["--update", "mb", "--budget", "1.5"]);
    let out = ws.run(&args);
    assert_eq!(code(&out), 2);

    let mut args = base.to_vec();
    args.extend(["--update", "mb", "--select", "sometimes"]);
    let out = ws.run(&args);
    assert_eq!(code(&out), 2);
}

#[test]
fn ingest_missing_prediction_is_data_error_and_keeps_state() {
    let ws = Ws::new();
    setup_initialized(&ws);
    let before = fs::read(ws.path("state.txt")).unwrap();
    // Step 1 with a partial file and full budget: some selected sample has
    // no prediction.
    ws.write("partial.csv", "a,0\n");
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "partial.csv",
        "--confusion",
        "cm.csv",
        "--update",
        "mb",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no prediction"));
    assert_eq!(fs::read(ws.path("state.txt")).unwrap(), before);
}

#[test]
fn ingest_soft_labels_jsonl() {
    let ws = Ws::new();
    setup_initialized(&ws);
    ws.write(
        "soft.jsonl",
        "{\"sample_id\":\"a\",\"probs\":[0.9,0.1]}\n{\"sample_id\":\"b\",\"probs\":[0.2,0.8]}\n{\"sample_id\":\"c\",\"probs\":[0.6,0.4]}\n{\"sample_id\":\"d\",\"probs\":[0.1,0.9]}\n",
    );
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "soft.jsonl",
        "--confusion",
        "cm.csv",
        "--update",
        "mbme",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn ingest_mismatched_class_count_is_data_error() {
    let ws = Ws::new();
    setup_initialized(&ws);
    ws.write("cm3.csv", "0.8,0.1,0.1\n0.1,0.8,0.1\n0.1,0.1,0.8\n");
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds0.csv",
        "--confusion",
        "cm3.csv",
        "--update",
        "mb",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn estimate_hand_counts() {
    let ws = Ws::new();
    ws.write("preds.csv", "x1,0\nx2,1\nx3,1\nx4,1\n");
    ws.write("truth.csv", "x1,0\nx2,0\nx3,1\nx4,1\n");
    let out = ws.run(&[
        "estimate",
        "--predictions",
        "preds.csv",
        "--truth",
        "truth.csv",
        "--classes",
        "2",
        "--mode",
        "diagonal",
        "--out",
        "diag.csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(ws.path("diag.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!((rows[0][0] - 0.5).abs() < 1e-12);
    assert!((rows[1][0] - 0.5).abs() < 1e-12);

    let out = ws.run(&[
        "estimate",
        "--predictions",
        "preds.csv",
        "--truth",
        "truth.csv",
        "--classes",
        "2",
        "--mode",
        "laplace",
        "--out",
        "laplace.csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(ws.path("laplace.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!((rows[0][1] - 0.25).abs() < 1e-12);
    assert!((rows[1][1] - 0.75).abs() < 1e-12);

    // Label outside the class range.
    ws.write("bad.csv", "x1,5\nx2,0\nx3,1\nx4,1\n");
    let out = ws.run(&[
        "estimate",
        "--predictions",
        "bad.csv",
        "--truth",
        "truth.csv",
        "--classes",
        "2",
        "--mode",
        "diagonal",
        "--out",
        "nope.csv",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn simulate_oracle_summary_row_renders_dash() {
    let ws = Ws::new();
    ws.write(
        "scenario.txt",
        "k = 4\nn_samples = 200\nclassifiers = 0.6, 0.75, 0.9\nupdate_policies = mb, oracle\nestimator = known\nseed = 11\n",
    );
    let out = ws.run(&["simulate", "--scenario", "scenario.txt", "--out-dir", "out"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(ws.path("out/summary.csv")).unwrap();
    let oracle_row = summary
        .lines()
        .find(|l| l.contains(",oracle,"))
        .expect("oracle row");
    let cells: Vec<&str> = oracle_row.split(',').collect();
    assert_eq!(cells[7], "0", "cum_nf: {oracle_row}");
    assert_eq!(cells[9], "-", "pf/nf: {oracle_row}");
    assert!(ws.path("out/entropy__mb.metrics.csv").exists());
    assert!(ws.path("out/entropy__mb.entropy.csv").exists());
}

#[test]
fn simulate_rejects_invalid_scenarios() {
    let ws = Ws::new();
    ws.write("bad.txt", "k = 4\nn_samples = 10\nclassifiers = 0.6\nseed = 1\n");
    let out = ws.run(&["simulate", "--scenario", "bad.txt", "--out-dir", "out"]);
    assert_eq!(code(&out), 3);

    ws.write(
        "bad2.txt",
        "k = 4\nn_samples = 10\nclassifiers = 0.6, 0.7\nseed = 1\nbudget_fraction = 0\n",
    );
    let out = ws.run(&["simulate", "--scenario", "bad2.txt", "--out-dir", "out"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn metrics_recomputes_simulated_summary() {
    let ws = Ws::new();
    ws.write(
        "scenario.txt",
        "k = 3\nn_samples = 150\nclassifiers = 0.55, 0.7, 0.85\nupdate_policies = cr:5\nestimator = known\nseed = 23\n",
    );
    let out = ws.run(&["simulate", "--scenario", "scenario.txt", "--out-dir", "out"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = ws.run(&[
        "metrics",
        "--steps",
        "out/entropy__cr-5.metrics.csv",
        "--n",
        "150",
        "--label",
        "cr:5",
        "--out",
        "recomputed.csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let sim_summary = fs::read_to_string(ws.path("out/summary.csv")).unwrap();
    let sim_row = sim_summary.lines().nth(1).unwrap();
    let recomputed = fs::read_to_string(ws.path("recomputed.csv")).unwrap();
    let re_row = recomputed.lines().nth(1).unwrap();
    // Same aggregates after the identity columns (select, update, budget).
    assert_eq!(
        sim_row.split(',').skip(3).collect::<Vec<_>>(),
        re_row.split(',').skip(3).collect::<Vec<_>>(),
    );
}

#[test]
fn export_entropy_lists_every_sample() {
    let ws = Ws::new();
    setup_initialized(&ws);
    let out = ws.run(&["export-entropy", "--state", "state.txt", "--out", "e.csv"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(ws.path("e.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sample_id,entropy,stored_label");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("a,"));
}

#[test]
fn corrupted_state_version_is_data_error() {
    let ws = Ws::new();
    setup_initialized(&ws);
    let state = fs::read_to_string(ws.path("state.txt")).unwrap();
    ws.write(
        "state.txt",
        &state.replace("format_version 1", "format_version 9"),
    );
    let out = ws.run(&["export-entropy", "--state", "state.txt", "--out", "e.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("format_version 9"));
}

#[test]
fn unknown_flag_exits_2() {
    let ws = Ws::new();
    let out = ws.run(&["init", "--classes", "2", "--bogus", "x"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ingest_with_truth_at_init_writes_step0_row() {
    let ws = Ws::new();
    ws.write("ids.txt", "a\nb\nc\nd\n");
    ws.write("cm.csv", "0.9,0.1\n0.1,0.9\n");
    ws.write("preds.csv", "a,0\nb,1\nc,0\nd,1\n");
    ws.write("truth.csv", "a,0\nb,1\nc,1\nd,1\n");
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--out", "state.txt",
    ]);
    assert_eq!(code(&out), 0);
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "preds.csv",
        "--confusion",
        "cm.csv",
        "--update",
        "mb",
        "--truth",
        "truth.csv",
        "--metrics-out",
        "m.csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m = fs::read_to_string(ws.path("m.csv")).unwrap();
    let lines: Vec<&str> = m.lines().collect();
    assert_eq!(lines[1], "0,0.75,0,0,0,0,1,1", "{m}");
}

#[test]
fn degenerate_posterior_exits_4() {
    // An identity confusion matrix plus two contradicting hard labels
    // zeroes the posterior outright.
    let ws = Ws::new();
    ws.write("ids.txt", "a\n");
    ws.write("identity.csv", "1,0\n0,1\n");
    ws.write("says0.csv", "a,0\n");
    ws.write("says1.csv", "a,1\n");
    let out = ws.run(&[
        "init", "--classes", "2", "--samples", "ids.txt", "--out", "state.txt",
    ]);
    assert_eq!(code(&out), 0);
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "says0.csv",
        "--confusion",
        "identity.csv",
        "--update",
        "mb",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = ws.run(&[
        "ingest",
        "--state",
        "state.txt",
        "--predictions",
        "says1.csv",
        "--confusion",
        "identity.csv",
        "--update",
        "mb",
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("all-zero"));
}

#[test]
fn state_files_work_across_commands() {
    let ws = Ws::new();
    setup_initialized(&ws);
    // metrics-out accumulates across two update steps.
    ws.write("truth.csv", "a,0\nb,1\nc,1\nd,1\n");
    ws.write("preds1.csv", "a,1\nb,1\nc,1\nd,1\n");
    for _ in 0..2 {
        let out = ws.run(&[
            "ingest",
            "--state",
            "state.txt",
            "--predictions",
            "preds1.csv",
            "--confusion",
            "cm.csv",
            "--update",
            "cr:2",
            "--truth",
            "truth.csv",
            "--metrics-out",
            "m.csv",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let m = fs::read_to_string(ws.path("m.csv")).unwrap();
    assert_eq!(m.lines().count(), 3, "{m}");
    let out = ws.run(&["metrics", "--steps", "m.csv", "--n", "4", "--initial-accuracy", "0.75"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("avg_btc"));
}

#[test]
fn simulate_handles_full_matrix_classifiers_from_files() {
    let ws = Ws::new();
    ws.write("weak.csv", "0.6,0.2,0.2\n0.2,0.6,0.2\n0.2,0.2,0.6\n");
    ws.write("strong.csv", "0.9,0.05,0.05\n0.05,0.9,0.05\n0.05,0.05,0.9\n");
    ws.write(
        "scenario.txt",
        "k = 3\nn_samples = 100\nclassifiers = file:weak.csv, file:strong.csv@0.9\n\
         update_policies = mb\nestimator = known\nseed = 3\n",
    );
    let out = ws.run(&["simulate", "--scenario", "scenario.txt", "--out-dir", "out"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(ws.path("out/summary.csv").exists());
}

#[test]
fn add_sample_path_keeps_existing_records() {
    // Snapshot format is stable enough to edit by hand: append a record
    // via snapshot surgery and the store still loads. This guards the
    // documented self-describing layout.
    let ws = Ws::new();
    setup_initialized(&ws);
    let state = fs::read_to_string(ws.path("state.txt")).unwrap();
    let patched = state
        .replace("records 4", "records 5")
        + "e 0 0 0,0 0.5,0.5 -\n";
    ws.write("state.txt", &patched);
    let out = ws.run(&["export-entropy", "--state", "state.txt", "--out", "e.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(ws.path("e.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
}
