//! Flip accounting and backward-compatibility scores against ground truth.
//!
//! Per step, against the truth: a *negative flip* turns a correct stored
//! label incorrect, a *positive flip* the reverse, a *neutral flip* moves
//! between two incorrect labels. BTC is the fraction of previously correct
//! labels still correct; BEC the fraction of post-step errors that are not
//! new. Both default to 1 when their denominator is empty, so a no-op step
//! is perfectly compatible.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{ClassId, SampleId};

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub step: u64,
    /// Accuracy of the stored labels after the step.
    pub accuracy: f64,
    pub nf: u64,
    pub pf: u64,
    pub neutral_flips: u64,
    pub btc: f64,
    pub bec: f64,
}

/// Per-step series plus the cumulative aggregates for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: Vec<StepMetrics>,
    /// Accuracy right after the initial batch, before any update step.
    pub initial_accuracy: f64,
    pub final_accuracy: f64,
    pub delta_acc: f64,
    pub cum_nf: u64,
    pub cum_pf: u64,
    /// `cum_nf / (N · T)`: average per-step negative flip rate.
    pub nfr: f64,
    /// `cum_pf / cum_nf`; `None` when no negative flip ever happened
    /// (rendered as `-` in reports).
    pub pf_nf_ratio: Option<f64>,
    pub avg_btc: f64,
    pub avg_bec: f64,
}

/// Accuracy of a label map against truth (same key set required).
pub fn accuracy(
    labels: &BTreeMap<SampleId, ClassId>,
    truth: &BTreeMap<SampleId, ClassId>,
) -> Result<f64> {
    check_keys(labels, truth)?;
    let correct = labels
        .iter()
        .filter(|(id, l)| truth[*id] == **l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

fn check_keys(
    a: &BTreeMap<SampleId, ClassId>,
    b: &BTreeMap<SampleId, ClassId>,
) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::KeyMismatch(alloc::format!(
            "{} vs {} samples",
            a.len(),
            b.len()
        )));
    }
    for id in a.keys() {
        if !b.contains_key(id) {
            return Err(Error::KeyMismatch(alloc::format!("{id} missing")));
        }
    }
    Ok(())
}

/// Score one transition of the stored labels.
pub fn step_metrics(
    before: &BTreeMap<SampleId, ClassId>,
    after: &BTreeMap<SampleId, ClassId>,
    truth: &BTreeMap<SampleId, ClassId>,
    step: u64,
) -> Result<StepMetrics> {
    check_keys(before, after)?;
    check_keys(before, truth)?;

    let mut nf = 0u64;
    let mut pf = 0u64;
    let mut neutral = 0u64;
    let mut correct_before = 0u64;
    let mut correct_both = 0u64;
    let mut correct_after = 0u64;
    let mut incorrect_after = 0u64;
    let mut incorrect_both = 0u64;

    for (id, b) in before {
        let a = after[id];
        let t = truth[id];
        let was = *b == t;
        let is = a == t;
        if was {
            correct_before += 1;
            if is {
                correct_both += 1;
            } else {
                nf += 1;
            }
        } else if is {
            pf += 1;
        } else if *b != a {
            neutral += 1;
        }
        if is {
            correct_after += 1;
        } else {
            incorrect_after += 1;
            if !was {
                incorrect_both += 1;
            }
        }
    }

    let n = before.len() as f64;
    let btc = if correct_before == 0 {
        1.0
    } else {
        correct_both as f64 / correct_before as f64
    };
    let bec = if incorrect_after == 0 {
        1.0
    } else {
        incorrect_both as f64 / incorrect_after as f64
    };
    Ok(StepMetrics {
        step,
        accuracy: correct_after as f64 / n,
        nf,
        pf,
        neutral_flips: neutral,
        btc,
        bec,
    })
}

/// Aggregate a step series into a run report.
pub fn finalize(
    steps: Vec<StepMetrics>,
    initial_accuracy: f64,
    n: usize,
    t: usize,
) -> Result<RunReport> {
    if steps.len() != t {
        return Err(Error::StepCountMismatch {
            expected: t,
            found: steps.len(),
        });
    }
    let cum_nf: u64 = steps.iter().map(|s| s.nf).sum();
    let cum_pf: u64 = steps.iter().map(|s| s.pf).sum();
    let final_accuracy = steps.last().map_or(initial_accuracy, |s| s.accuracy);
    let nfr = if t == 0 {
        0.0
    } else {
        cum_nf as f64 / (n as f64 * t as f64)
    };
    let pf_nf_ratio = if cum_nf == 0 {
        None
    } else {
        Some(cum_pf as f64 / cum_nf as f64)
    };
    let (avg_btc, avg_bec) = if steps.is_empty() {
        (1.0, 1.0)
    } else {
        (
            steps.iter().map(|s| s.btc).sum::<f64>() / t as f64,
            steps.iter().map(|s| s.bec).sum::<f64>() / t as f64,
        )
    };
    Ok(RunReport {
        initial_accuracy,
        final_accuracy,
        delta_acc: final_accuracy - initial_accuracy,
        cum_nf,
        cum_pf,
        nfr,
        pf_nf_ratio,
        avg_btc,
        avg_bec,
        steps,
    })
}

/// Fraction rendered as a percentage with two decimals, e.g. `0.53`.
pub fn percent_string(fraction: f64) -> String {
    alloc::format!("{:.2}", fraction * 100.0)
}
