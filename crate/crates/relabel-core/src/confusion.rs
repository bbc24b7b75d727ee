//! Confusion-matrix estimation from a labelled source split.
//!
//! Two regimes: diagonal-only (per-class accuracies, off-diagonal mass
//! spread uniformly), for when `K` is large relative to the labelled data;
//! and the full matrix with add-one (Laplace) smoothing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{ClassId, ConfusionMatrix};

/// Clamp applied to diagonal estimates so no off-diagonal becomes exactly
/// zero: a hard zero would let a single contrary observation wipe out a
/// class's posterior mass.
pub const DIAG_CLAMP: f64 = 1e-6;

fn validate(preds: &[ClassId], truths: &[ClassId], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidClassCount(k));
    }
    if preds.is_empty() || truths.is_empty() {
        return Err(Error::NoSamples);
    }
    if preds.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            found: preds.len(),
        });
    }
    for c in preds.iter().chain(truths) {
        c.check(k)?;
    }
    Ok(())
}

/// Estimate only the per-class accuracies; off-diagonals in column `j` are
/// the constant `(1 - diag[j]) / (k - 1)`. Classes without support get an
/// uninformative uniform column.
pub fn estimate_diagonal(preds: &[ClassId], truths: &[ClassId], k: usize) -> Result<ConfusionMatrix> {
    validate(preds, truths, k)?;
    let mut support = vec![0u64; k];
    let mut correct = vec![0u64; k];
    for (p, t) in preds.iter().zip(truths) {
        support[t.0] += 1;
        if p == t {
            correct[t.0] += 1;
        }
    }
    let diag: Vec<f64> = (0..k)
        .map(|c| {
            let raw = if support[c] == 0 {
                1.0 / k as f64
            } else {
                correct[c] as f64 / support[c] as f64
            };
            raw.clamp(DIAG_CLAMP, 1.0 - DIAG_CLAMP)
        })
        .collect();
    ConfusionMatrix::with_diagonal(&diag)
}

/// Full matrix with add-one smoothing:
/// `entry(i, j) = (count(pred=i, true=j) + 1) / (support(j) + k)`.
pub fn estimate_full_laplace(
    preds: &[ClassId],
    truths: &[ClassId],
    k: usize,
) -> Result<ConfusionMatrix> {
    validate(preds, truths, k)?;
    let mut counts = vec![0u64; k * k];
    let mut support = vec![0u64; k];
    for (p, t) in preds.iter().zip(truths) {
        counts[p.0 * k + t.0] += 1;
        support[t.0] += 1;
    }
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (counts[i * k + j] + 1) as f64 / (support[j] + k as u64) as f64)
                .collect()
        })
        .collect();
    ConfusionMatrix::from_rows(rows)
}
