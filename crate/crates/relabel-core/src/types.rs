//! Domain types: class ids, sample ids, confusion matrices, priors, and
//! prediction batches.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// Tolerance for a confusion-matrix column sum at construction time.
pub const COLUMN_SUM_TOL: f64 = 1e-9;
/// Tolerance for user-supplied probability vectors (soft labels, explicit
/// priors), which are then renormalized exactly.
pub const INPUT_SUM_TOL: f64 = 1e-6;

/// Zero-based class index in a label space of `k` classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub usize);

impl ClassId {
    pub fn index(self) -> usize {
        self.0
    }

    pub(crate) fn check(self, k: usize) -> Result<()> {
        if self.0 < k {
            Ok(())
        } else {
            Err(Error::ClassOutOfRange { class: self.0, k })
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque key identifying one sample in a store.
///
/// Ids appear verbatim in the text formats, so they must be nonempty and
/// free of whitespace and commas. Ordering is lexicographic and is the
/// canonical tie-break and processing order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SampleId(String);

impl SampleId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::InvalidSampleId(id));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Column-stochastic K×K likelihood table.
///
/// `entry(i, k)` is the probability that the classifier predicts class `i`
/// when the true class is `k`: each *column* is a distribution over
/// predictions. Stored row-major so that the likelihood row for an observed
/// prediction is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl ConfusionMatrix {
    /// Build from row-major rows, validating column stochasticity within
    /// [`COLUMN_SUM_TOL`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, COLUMN_SUM_TOL, false)
    }

    /// Build from row-major rows, accepting column sums within `tol` of 1
    /// and renormalizing each column exactly.
    pub fn from_rows_renormalized(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        Self::build(rows, tol, true)
    }

    fn build(rows: Vec<Vec<f64>>, tol: f64, renormalize: bool) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::InvalidClassCount(k));
        }
        for row in &rows {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
        }
        let mut entries = Vec::with_capacity(k * k);
        for row in &rows {
            for &v in row {
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::InvalidDistribution(alloc::format!(
                        "confusion entry {v} outside [0, 1]"
                    )));
                }
                entries.push(v);
            }
        }
        let mut cm = Self { k, entries };
        for col in 0..k {
            let sum: f64 = (0..k).map(|row| cm.entries[row * k + col]).sum();
            if math::abs(sum - 1.0) > tol {
                return Err(Error::NonStochasticColumn { column: col, sum });
            }
            if renormalize {
                for row in 0..k {
                    cm.entries[row * k + col] /= sum;
                }
            }
        }
        Ok(cm)
    }

    /// Diagonal entries as given, every off-diagonal in column `j` set to
    /// `(1 - diag[j]) / (k - 1)`.
    pub fn with_diagonal(diag: &[f64]) -> Result<Self> {
        let k = diag.len();
        if k < 2 {
            return Err(Error::InvalidClassCount(k));
        }
        for &d in diag {
            if !(0.0..=1.0).contains(&d) || !d.is_finite() {
                return Err(Error::InvalidDistribution(alloc::format!(
                    "diagonal entry {d} outside [0, 1]"
                )));
            }
        }
        let mut entries = vec![0.0; k * k];
        for col in 0..k {
            let off = (1.0 - diag[col]) / (k - 1) as f64;
            for row in 0..k {
                entries[row * k + col] = if row == col { diag[col] } else { off };
            }
        }
        Ok(Self { k, entries })
    }

    /// Same accuracy for every class, uniform off-diagonals.
    pub fn uniform_accuracy(k: usize, accuracy: f64) -> Result<Self> {
        Self::with_diagonal(&vec![accuracy; k])
    }

    /// The deterministic channel: predictions always equal the true class.
    pub fn identity(k: usize) -> Result<Self> {
        let mut entries = vec![0.0; k * k];
        for i in 0..k {
            entries[i * k + i] = 1.0;
        }
        if k < 2 {
            return Err(Error::InvalidClassCount(k));
        }
        Ok(Self { k, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// π(pred, truth).
    pub fn entry(&self, pred: ClassId, truth: ClassId) -> f64 {
        self.entries[pred.0 * self.k + truth.0]
    }

    /// Likelihood row for an observed prediction: `row(i)[j] = π(i, j)`.
    pub fn row(&self, pred: usize) -> &[f64] {
        &self.entries[pred * self.k..(pred + 1) * self.k]
    }

    /// Column for a true class: the distribution over predictions.
    pub fn column(&self, truth: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).map(move |row| self.entries[row * self.k + truth])
    }

    /// Mean of the diagonal, used as a fallback ordering accuracy.
    pub fn mean_diagonal(&self) -> f64 {
        (0..self.k).map(|i| self.entries[i * self.k + i]).sum::<f64>() / self.k as f64
    }

    /// Row-major rows, for serialization.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.k).map(move |i| self.row(i))
    }
}

/// Prior belief over the true label of a fresh sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Uniform,
    Explicit(Vec<f64>),
}

impl Prior {
    /// Concrete length-`k` distribution; explicit priors are validated
    /// within [`INPUT_SUM_TOL`] and renormalized exactly.
    pub fn distribution(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            Prior::Uniform => Ok(vec![1.0 / k as f64; k]),
            Prior::Explicit(p) => {
                validate_distribution(p, k, INPUT_SUM_TOL)?;
                let sum: f64 = p.iter().sum();
                Ok(p.iter().map(|v| v / sum).collect())
            }
        }
    }
}

pub(crate) fn validate_distribution(p: &[f64], k: usize, tol: f64) -> Result<()> {
    if p.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: p.len(),
        });
    }
    let mut sum = 0.0;
    for &v in p {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::InvalidDistribution(alloc::format!(
                "entry {v} is negative or non-finite"
            )));
        }
        sum += v;
    }
    if math::abs(sum - 1.0) > tol {
        return Err(Error::InvalidDistribution(alloc::format!(
            "sums to {sum}, not 1"
        )));
    }
    Ok(())
}

/// One classifier output for one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Hard(ClassId),
    /// Probability vector over classes; must sum to 1 within
    /// [`INPUT_SUM_TOL`].
    Soft(Vec<f64>),
}

impl Prediction {
    /// The hard label: the label itself, or the argmax of a soft vector
    /// (lowest index on ties).
    pub fn hard_label(&self) -> ClassId {
        match self {
            Prediction::Hard(c) => *c,
            Prediction::Soft(p) => crate::bayes::map_label(p),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            Prediction::Hard(c) => c.check(k),
            Prediction::Soft(p) => validate_distribution(p, k, INPUT_SUM_TOL),
        }
    }
}

/// One classifier's outputs for a set of samples at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBatch {
    /// Informational time index; not validated against the store.
    pub step: u64,
    pub entries: BTreeMap<SampleId, Prediction>,
}

impl PredictionBatch {
    pub fn new(step: u64) -> Self {
        Self {
            step,
            entries: BTreeMap::new(),
        }
    }

    /// Empirical accuracy of the batch's hard labels against a truth map,
    /// over the samples present in both.
    pub fn accuracy_against(&self, truth: &BTreeMap<SampleId, ClassId>) -> f64 {
        let mut n = 0usize;
        let mut correct = 0usize;
        for (id, pred) in &self.entries {
            if let Some(t) = truth.get(id) {
                n += 1;
                if pred.hard_label() == *t {
                    correct += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            correct as f64 / n as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_id_rejects_bad_input() {
        assert!(SampleId::new("ok_id-1").is_ok());
        assert!(SampleId::new("").is_err());
        assert!(SampleId::new("has space").is_err());
        assert!(SampleId::new("has,comma").is_err());
        assert!(SampleId::new("has\ttab").is_err());
    }

    #[test]
    fn confusion_matrix_validates_columns() {
        let ok = ConfusionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert_eq!(ok.k(), 2);
        assert_eq!(ok.entry(ClassId(0), ClassId(1)), 0.1);

        let bad = ConfusionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.9]]);
        assert!(matches!(bad, Err(Error::NonStochasticColumn { column: 0, .. })));

        let ragged = ConfusionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.1]]);
        assert!(matches!(ragged, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn renormalized_columns_sum_to_one() {
        let cm = ConfusionMatrix::from_rows_renormalized(
            vec![vec![0.9, 0.0999999], vec![0.0999999, 0.9]],
            1e-6,
        )
        .unwrap();
        for col in 0..2 {
            let sum: f64 = cm.column(col).sum();
            assert!((sum - 1.0).abs() < 1e-15);
        }
        let too_far =
            ConfusionMatrix::from_rows_renormalized(vec![vec![0.8, 0.1], vec![0.1, 0.8]], 1e-6);
        assert!(too_far.is_err());
    }

    #[test]
    fn with_diagonal_spreads_off_mass() {
        let cm = ConfusionMatrix::with_diagonal(&[0.7, 0.7, 0.7]).unwrap();
        assert!((cm.entry(ClassId(0), ClassId(0)) - 0.7).abs() < 1e-15);
        assert!((cm.entry(ClassId(1), ClassId(0)) - 0.15).abs() < 1e-15);
        for col in 0..3 {
            let sum: f64 = cm.column(col).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_prior_renormalizes() {
        let p = Prior::Explicit(vec![0.7000001, 0.3]).distribution(2).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Prior::Explicit(vec![0.7, 0.2]).distribution(2).is_err());
        assert!(Prior::Explicit(vec![0.5, 0.5, 0.0]).distribution(2).is_err());
    }

    #[test]
    fn soft_prediction_hard_label_ties_break_low() {
        let p = Prediction::Soft(vec![0.4, 0.4, 0.2]);
        assert_eq!(p.hard_label(), ClassId(0));
    }
}
