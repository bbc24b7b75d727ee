//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Class count below 2.
    InvalidClassCount(usize),
    /// Sample id is empty or contains whitespace or a comma.
    InvalidSampleId(String),
    /// The same sample id was supplied or ingested twice.
    DuplicateSample(String),
    /// A sample id is not present in the store.
    UnknownSample(String),
    /// A class index is outside `[0, k)`.
    ClassOutOfRange { class: usize, k: usize },
    /// Vector or matrix dimensions disagree with the class count.
    DimensionMismatch { expected: usize, found: usize },
    /// A probability vector has a negative entry or does not sum to 1.
    InvalidDistribution(String),
    /// A confusion matrix column does not sum to 1 within tolerance.
    NonStochasticColumn { column: usize, sum: f64 },
    /// The posterior collapsed to all zeros; the confusion matrix assigns
    /// zero likelihood to every class still carrying mass.
    DegeneratePosterior,
    /// A store was asked to create zero records.
    NoSamples,
    /// A batch lacks a prediction for a selected sample.
    MissingPrediction(String),
    /// The initial batch does not cover every sample.
    IncompleteCoverage(String),
    /// The store already ingested its initial batch.
    AlreadyInitialized,
    /// The oracle policy has no ground-truth entry for a sample.
    MissingTruth(String),
    /// A policy spelling could not be parsed.
    InvalidPolicy(String),
    /// Label maps passed to the metrics do not share a key set.
    KeyMismatch(String),
    /// `finalize` was given a step count that disagrees with the series.
    StepCountMismatch { expected: usize, found: usize },
    /// A scenario specification failed validation.
    InvalidScenario(String),
    /// Snapshot stream has an unsupported format version.
    SnapshotVersion { found: u64 },
    /// Snapshot stream ended before the declared record count.
    SnapshotTruncated,
    /// Snapshot stream is malformed.
    SnapshotFormat(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidClassCount(k) => write!(f, "class count must be at least 2, got {k}"),
            Self::InvalidSampleId(id) => write!(
                f,
                "invalid sample id {id:?}: must be nonempty, without whitespace or commas"
            ),
            Self::DuplicateSample(id) => write!(f, "duplicate sample id {id}"),
            Self::UnknownSample(id) => write!(f, "unknown sample id {id}"),
            Self::ClassOutOfRange { class, k } => {
                write!(f, "class {class} out of range for {k} classes")
            }
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::InvalidDistribution(why) => write!(f, "invalid probability vector: {why}"),
            Self::NonStochasticColumn { column, sum } => {
                write!(f, "confusion matrix column {column} sums to {sum}, not 1")
            }
            Self::DegeneratePosterior => {
                write!(f, "posterior update produced an all-zero vector")
            }
            Self::NoSamples => write!(f, "a store needs at least one sample"),
            Self::MissingPrediction(id) => {
                write!(f, "batch has no prediction for selected sample {id}")
            }
            Self::IncompleteCoverage(id) => {
                write!(f, "initial batch has no prediction for sample {id}")
            }
            Self::AlreadyInitialized => write!(f, "store already ingested its initial batch"),
            Self::MissingTruth(id) => write!(f, "oracle has no truth entry for sample {id}"),
            Self::InvalidPolicy(spec) => write!(f, "unrecognised policy {spec:?}"),
            Self::KeyMismatch(why) => write!(f, "label maps disagree: {why}"),
            Self::StepCountMismatch { expected, found } => {
                write!(f, "expected {expected} step records, found {found}")
            }
            Self::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
            Self::SnapshotVersion { found } => {
                write!(f, "unsupported snapshot format_version {found}")
            }
            Self::SnapshotTruncated => write!(f, "snapshot stream is truncated"),
            Self::SnapshotFormat(why) => write!(f, "malformed snapshot: {why}"),
        }
    }
}

impl core::error::Error for Error {}
