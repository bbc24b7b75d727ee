//! Budgeted candidate selection and the label-update rules.
//!
//! Selection picks which samples the new classifier re-evaluates: the
//! budget-many with highest posterior entropy, or a seeded random subset.
//! After each selected sample's posterior absorbs the new prediction, an
//! update rule decides whether the stored label changes:
//!
//! * `Replace` — always take the new prediction (backfilling).
//! * `MajorityVote` — most-voted class so far, newest prediction breaking
//!   ties it participates in.
//! * `MaxBelief` (MB) — the posterior MAP label.
//! * `MaxBeliefMinEntropy` (MBME) — the MAP label, but only when the
//!   posterior entropy strictly decreased.
//! * `CostRatio(r)` (CR) — the MAP label, but only when the posterior odds
//!   for it versus the stored label strictly exceed `r`; `r` is the cost
//!   ratio of a negative flip to a positive flip.
//! * `Oracle` — ground-truth peeking reference: updates only on positive
//!   flips, so it never flips negatively.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bayes;
use crate::error::{Error, Result};
use crate::store::{LabelStore, PosteriorRecord};
use crate::types::{ClassId, ConfusionMatrix, PredictionBatch, SampleId};
use crate::rng::{self, Rng};

/// How re-evaluation candidates are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Highest cached posterior entropy first; ascending id on ties.
    Entropy,
    /// Seeded draw without replacement; the per-step stream mixes the seed
    /// with the store's step index so every step is a fresh draw.
    Random { seed: u64 },
}

impl SelectionPolicy {
    /// Parse the config spelling: `entropy` or `random:<seed>`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "entropy" {
            return Ok(Self::Entropy);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::InvalidPolicy(s.to_string()))?;
            return Ok(Self::Random { seed });
        }
        Err(Error::InvalidPolicy(s.to_string()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Entropy => "entropy".into(),
            Self::Random { seed } => alloc::format!("random:{seed}"),
        }
    }
}

/// Update rule as named in configs; [`UpdateRule::resolve`] attaches the
/// ground truth an oracle needs.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateRule {
    Replace,
    Majority,
    Mb,
    Mbme,
    Cr(f64),
    Oracle,
}

impl UpdateRule {
    /// Parse the config spelling: `replace`, `majority`, `mb`, `mbme`,
    /// `cr:<ratio>`, `oracle`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "replace" => return Ok(Self::Replace),
            "majority" => return Ok(Self::Majority),
            "mb" => return Ok(Self::Mb),
            "mbme" => return Ok(Self::Mbme),
            "oracle" => return Ok(Self::Oracle),
            _ => {}
        }
        if let Some(ratio) = s.strip_prefix("cr:") {
            let ratio: f64 = ratio
                .parse()
                .map_err(|_| Error::InvalidPolicy(s.to_string()))?;
            if ratio > 0.0 && ratio.is_finite() {
                return Ok(Self::Cr(ratio));
            }
        }
        Err(Error::InvalidPolicy(s.to_string()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Replace => "replace".into(),
            Self::Majority => "majority".into(),
            Self::Mb => "mb".into(),
            Self::Mbme => "mbme".into(),
            Self::Cr(r) => alloc::format!("cr:{r}"),
            Self::Oracle => "oracle".into(),
        }
    }

    /// Bind to a runnable policy; `oracle` requires a truth map.
    pub fn resolve(&self, truth: Option<&BTreeMap<SampleId, ClassId>>) -> Result<UpdatePolicy> {
        Ok(match self {
            Self::Replace => UpdatePolicy::Replace,
            Self::Majority => UpdatePolicy::MajorityVote,
            Self::Mb => UpdatePolicy::MaxBelief,
            Self::Mbme => UpdatePolicy::MaxBeliefMinEntropy,
            Self::Cr(r) => UpdatePolicy::CostRatio { ratio: *r },
            Self::Oracle => UpdatePolicy::Oracle {
                truth: truth
                    .ok_or_else(|| Error::InvalidPolicy("oracle needs ground truth".into()))?
                    .clone(),
            },
        })
    }
}

/// A runnable update rule.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdatePolicy {
    Replace,
    MajorityVote,
    MaxBelief,
    MaxBeliefMinEntropy,
    CostRatio { ratio: f64 },
    Oracle { truth: BTreeMap<SampleId, ClassId> },
}

/// What one step did: who was re-evaluated (in selection order) and whose
/// stored label changed (ascending id, the processing order).
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub selected: Vec<SampleId>,
    pub changed: Vec<(SampleId, ClassId, ClassId)>,
}

/// Resolve a budget fraction to a per-step count: `floor(fraction · n)`,
/// with a tiny epsilon so products like `0.3 · 1000` land on 300.
pub fn resolve_budget(fraction: f64, n: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidScenario(alloc::format!(
            "budget fraction {fraction} outside (0, 1]"
        )));
    }
    Ok(((fraction * n as f64) + 1e-9) as usize)
}

/// Pick up to `budget` samples for re-evaluation.
pub fn select(store: &LabelStore, budget: usize, policy: &SelectionPolicy) -> Vec<SampleId> {
    let n = store.len();
    let take = budget.min(n);
    match policy {
        SelectionPolicy::Entropy => {
            let mut ranked: Vec<(&SampleId, f64)> =
                store.records().map(|(id, r)| (id, r.entropy)).collect();
            ranked.sort_unstable_by(|a, b| {
                b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
            });
            ranked.truncate(take);
            ranked.into_iter().map(|(id, _)| id.clone()).collect()
        }
        SelectionPolicy::Random { seed } => {
            let mut ids: Vec<&SampleId> = store.ids().collect();
            let mut rng = Rng::new(rng::derive_seed(*seed, rng::tags::SELECT, store.step()));
            // Partial Fisher-Yates: the first `take` slots are a uniform
            // draw without replacement.
            for i in 0..take {
                let j = i + rng.below((n - i) as u64) as usize;
                ids.swap(i, j);
            }
            ids.truncate(take);
            ids.into_iter().cloned().collect()
        }
    }
}

/// Apply one update rule to a sample whose posterior has just absorbed
/// `new_prediction`. Returns the new stored label.
pub fn decide(
    before: &PosteriorRecord,
    after: &PosteriorRecord,
    new_prediction: ClassId,
    policy: &UpdatePolicy,
    sample: &SampleId,
) -> Result<ClassId> {
    Ok(match policy {
        UpdatePolicy::Replace => new_prediction,
        UpdatePolicy::MajorityVote => {
            let max = *after.vote_counts.iter().max().expect("nonempty votes");
            if after.vote_counts[new_prediction.0] == max {
                new_prediction
            } else {
                let lowest = after
                    .vote_counts
                    .iter()
                    .position(|&c| c == max)
                    .expect("max exists");
                ClassId(lowest)
            }
        }
        UpdatePolicy::MaxBelief => bayes::map_label(&after.posterior),
        UpdatePolicy::MaxBeliefMinEntropy => {
            if after.entropy < before.entropy {
                bayes::map_label(&after.posterior)
            } else {
                before.stored_label
            }
        }
        UpdatePolicy::CostRatio { ratio } => {
            let map = bayes::map_label(&after.posterior);
            let current = before.stored_label;
            if map == current {
                map
            } else {
                let p_map = after.posterior[map.0];
                let p_cur = after.posterior[current.0];
                let odds = if p_cur == 0.0 {
                    f64::INFINITY
                } else {
                    p_map / p_cur
                };
                if odds > *ratio {
                    map
                } else {
                    current
                }
            }
        }
        UpdatePolicy::Oracle { truth } => {
            let truth = *truth
                .get(sample)
                .ok_or_else(|| Error::MissingTruth(sample.to_string()))?;
            if before.stored_label != truth && new_prediction == truth {
                new_prediction
            } else {
                before.stored_label
            }
        }
    })
}

/// A batch may only speak about samples the store knows.
fn check_batch_membership(store: &LabelStore, batch: &PredictionBatch) -> Result<()> {
    for id in batch.entries.keys() {
        if store.record(id).is_none() {
            return Err(Error::UnknownSample(id.to_string()));
        }
    }
    Ok(())
}

/// One budgeted step: select, ingest each selected prediction, apply the
/// update rule, bump the store's step counter. Non-selected samples are
/// untouched. The mutation is staged and committed only if every selected
/// sample processes cleanly, so a failed step leaves the store unchanged.
pub fn run_step(
    store: &mut LabelStore,
    batch: &PredictionBatch,
    cm: &ConfusionMatrix,
    select_policy: &SelectionPolicy,
    update_policy: &UpdatePolicy,
    budget: usize,
) -> Result<StepOutcome> {
    if cm.k() != store.k() {
        return Err(Error::DimensionMismatch {
            expected: store.k(),
            found: cm.k(),
        });
    }
    check_batch_membership(store, batch)?;
    let selected = select(store, budget, select_policy);

    // Process in ascending id order; the result is order-independent, but
    // the changed listing is canonical.
    let mut order: Vec<&SampleId> = selected.iter().collect();
    order.sort_unstable();

    let mut staged: Vec<(SampleId, PosteriorRecord)> = Vec::with_capacity(order.len());
    let mut changed = Vec::new();
    for id in order {
        let pred = batch
            .entries
            .get(id)
            .ok_or_else(|| Error::MissingPrediction(id.to_string()))?;
        pred.validate(store.k())?;
        let before = store.record(id).expect("selected id exists");
        let mut after = before.clone();
        let hard = after.ingest(cm, pred)?;
        let new_label = decide(before, &after, hard, update_policy, id)?;
        if new_label != before.stored_label {
            changed.push((id.clone(), before.stored_label, new_label));
        }
        after.stored_label = new_label;
        staged.push((id.clone(), after));
    }
    for (id, rec) in staged {
        *store.record_mut(&id).expect("selected id exists") = rec;
    }
    store.advance_step();
    Ok(StepOutcome { selected, changed })
}

/// Ingest the initial batch: every sample absorbs its prediction and the
/// stored label becomes that prediction unconditionally (every policy
/// agrees at the first step).
pub fn initialize_with(
    store: &mut LabelStore,
    batch: &PredictionBatch,
    cm: &ConfusionMatrix,
) -> Result<StepOutcome> {
    if store.step() != 0 {
        return Err(Error::AlreadyInitialized);
    }
    if cm.k() != store.k() {
        return Err(Error::DimensionMismatch {
            expected: store.k(),
            found: cm.k(),
        });
    }
    check_batch_membership(store, batch)?;
    let ids: Vec<SampleId> = store.ids().cloned().collect();
    for id in &ids {
        let pred = batch
            .entries
            .get(id)
            .ok_or_else(|| Error::IncompleteCoverage(id.to_string()))?;
        pred.validate(store.k())?;
    }
    let mut changed = Vec::new();
    for id in &ids {
        let pred = &batch.entries[id];
        let rec = store.record_mut(id).expect("id exists");
        let old = rec.stored_label;
        let hard = rec.ingest(cm, pred)?;
        rec.stored_label = hard;
        if hard != old {
            changed.push((id.clone(), old, hard));
        }
    }
    store.advance_step();
    Ok(StepOutcome {
        selected: ids,
        changed,
    })
}
