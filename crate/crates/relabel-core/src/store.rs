//! The persistent label store: one posterior record per sample.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::bayes;
use crate::error::{Error, Result};
use crate::types::{ClassId, ConfusionMatrix, Prediction, Prior, SampleId};

/// Belief state for one sample.
///
/// `posterior` always sums to 1 within 1e-9; `entropy` is kept equal to
/// `bayes::entropy(&posterior)` by every mutation path; `vote_counts` sum
/// to `eval_count` (one increment per ingested prediction's hard label).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorRecord {
    pub posterior: Vec<f64>,
    pub stored_label: ClassId,
    pub entropy: f64,
    pub last_prediction: Option<ClassId>,
    pub vote_counts: Vec<u64>,
    pub eval_count: u64,
}

impl PosteriorRecord {
    fn fresh(distribution: Vec<f64>) -> Self {
        let entropy = bayes::entropy(&distribution);
        let stored_label = bayes::map_label(&distribution);
        let k = distribution.len();
        Self {
            posterior: distribution,
            stored_label,
            entropy,
            last_prediction: None,
            vote_counts: vec![0; k],
            eval_count: 0,
        }
    }

    /// Fold one prediction into the belief: Bayes update, vote and
    /// evaluation counters, entropy cache, last hard prediction. Does NOT
    /// touch `stored_label`; that is the update policy's decision.
    pub(crate) fn ingest(&mut self, cm: &ConfusionMatrix, pred: &Prediction) -> Result<ClassId> {
        let posterior = match pred {
            Prediction::Hard(c) => bayes::posterior_update(&self.posterior, cm, *c)?,
            Prediction::Soft(p) => bayes::posterior_update_soft(&self.posterior, cm, p)?,
        };
        let hard = pred.hard_label();
        self.posterior = posterior;
        self.entropy = bayes::entropy(&self.posterior);
        self.vote_counts[hard.0] += 1;
        self.eval_count += 1;
        self.last_prediction = Some(hard);
        Ok(hard)
    }
}

/// Map from sample id to posterior record plus the shared class count and
/// the number of batches ingested so far.
///
/// `step() == 0` means the store has not yet seen its initial batch; the
/// stored labels are then just the prior's argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelStore {
    k: usize,
    step: u64,
    records: BTreeMap<SampleId, PosteriorRecord>,
}

impl LabelStore {
    /// Create a store with one record per sample, all holding the prior.
    pub fn new(k: usize, samples: Vec<SampleId>, prior: &Prior) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidClassCount(k));
        }
        if samples.is_empty() {
            return Err(Error::NoSamples);
        }
        let distribution = prior.distribution(k)?;
        let mut records = BTreeMap::new();
        for id in samples {
            match records.entry(id) {
                Entry::Occupied(e) => {
                    return Err(Error::DuplicateSample(e.key().to_string()));
                }
                Entry::Vacant(e) => {
                    e.insert(PosteriorRecord::fresh(distribution.clone()));
                }
            }
        }
        Ok(Self {
            k,
            step: 0,
            records,
        })
    }

    /// Add samples later with a uniform prior; their maximal entropy puts
    /// them at the front of the selection queue.
    pub fn add_samples(&mut self, samples: Vec<SampleId>) -> Result<()> {
        for id in &samples {
            if self.records.contains_key(id) {
                return Err(Error::DuplicateSample(id.to_string()));
            }
        }
        let uniform = Prior::Uniform.distribution(self.k)?;
        for id in samples {
            match self.records.entry(id) {
                Entry::Occupied(e) => {
                    // Duplicate within the argument list itself.
                    return Err(Error::DuplicateSample(e.key().to_string()));
                }
                Entry::Vacant(e) => {
                    e.insert(PosteriorRecord::fresh(uniform.clone()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        k: usize,
        step: u64,
        records: BTreeMap<SampleId, PosteriorRecord>,
    ) -> Self {
        Self { k, step, records }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of batches ingested so far (the initial batch counts).
    pub fn step(&self) -> u64 {
        self.step
    }

    pub(crate) fn advance_step(&mut self) {
        self.step += 1;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, id: &SampleId) -> Option<&PosteriorRecord> {
        self.records.get(id)
    }

    pub(crate) fn record_mut(&mut self, id: &SampleId) -> Option<&mut PosteriorRecord> {
        self.records.get_mut(id)
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = (&SampleId, &PosteriorRecord)> {
        self.records.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &SampleId> {
        self.records.keys()
    }

    /// Current stored labels, ascending by id.
    pub fn stored_labels(&self) -> BTreeMap<SampleId, ClassId> {
        self.records
            .iter()
            .map(|(id, r)| (id.clone(), r.stored_label))
            .collect()
    }
}
