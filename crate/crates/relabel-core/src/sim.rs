//! Synthetic scenario runner: draws ground truth and classifier prediction
//! streams from specified confusion matrices, then runs every update
//! policy over the same streams for a paired comparison.
//!
//! All randomness is derived from the scenario's root seed through
//! [`crate::rng::derive_seed`], so a spec reproduces byte-identical
//! results regardless of thread count.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{self, RunReport};
use crate::rng::{self, Rng};
use crate::store::LabelStore;
use crate::strategy::{self, SelectionPolicy, UpdateRule};
use crate::types::{ClassId, ConfusionMatrix, Prediction, PredictionBatch, Prior, SampleId};

/// How a synthetic classifier's confusion matrix is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum CmSpec {
    /// Uniform per-class accuracy with uniform off-diagonals.
    DiagAccuracy(f64),
    /// An explicit matrix.
    Full(ConfusionMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub cm: CmSpec,
    /// Accuracy used for ordering; defaults to the diagonal accuracy or
    /// the matrix's mean diagonal.
    pub reported_accuracy: Option<f64>,
}

impl ClassifierSpec {
    pub fn diag(accuracy: f64) -> Self {
        Self {
            cm: CmSpec::DiagAccuracy(accuracy),
            reported_accuracy: None,
        }
    }

    pub fn full(cm: ConfusionMatrix) -> Self {
        Self {
            cm: CmSpec::Full(cm),
            reported_accuracy: None,
        }
    }

    pub fn ordering_accuracy(&self) -> f64 {
        self.reported_accuracy.unwrap_or(match &self.cm {
            CmSpec::DiagAccuracy(a) => *a,
            CmSpec::Full(cm) => cm.mean_diagonal(),
        })
    }

    /// Concrete matrix for a `k`-class scenario.
    pub fn expand(&self, k: usize) -> Result<ConfusionMatrix> {
        match &self.cm {
            CmSpec::DiagAccuracy(a) => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::InvalidScenario(alloc::format!(
                        "classifier accuracy {a} outside (0, 1)"
                    )));
                }
                ConfusionMatrix::uniform_accuracy(k, *a)
            }
            CmSpec::Full(cm) => {
                if cm.k() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        found: cm.k(),
                    });
                }
                Ok(cm.clone())
            }
        }
    }
}

/// Order in which the classifier sequence arrives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelOrdering {
    /// Ascending accuracy (the standard setting).
    Improving,
    /// Strictly deteriorating: descending accuracy.
    Adversarial,
    /// Seeded shuffle.
    Random { seed: u64 },
}

impl ModelOrdering {
    /// Parse `improving`, `adversarial`, or `random:<seed>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "improving" => return Ok(Self::Improving),
            "adversarial" => return Ok(Self::Adversarial),
            _ => {}
        }
        if let Some(seed) = s.strip_prefix("random:") {
            if let Ok(seed) = seed.parse() {
                return Ok(Self::Random { seed });
            }
        }
        Err(Error::InvalidScenario(alloc::format!("unknown ordering {s:?}")))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Improving => "improving".into(),
            Self::Adversarial => "adversarial".into(),
            Self::Random { seed } => alloc::format!("random:{seed}"),
        }
    }
}

/// Which confusion-matrix estimate the strategies run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// The true matrix, isolating strategy behaviour from estimation
    /// error.
    Known,
    /// Diagonal-only estimate from the source split.
    Diagonal,
    /// Full matrix with add-one smoothing from the source split.
    FullLaplace,
}

impl Estimator {
    /// Parse `known`, `diagonal`, or `laplace`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(Self::Known),
            "diagonal" => Ok(Self::Diagonal),
            "laplace" => Ok(Self::FullLaplace),
            _ => Err(Error::InvalidScenario(alloc::format!(
                "unknown estimator {s:?}"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Known => "known",
            Self::Diagonal => "diagonal",
            Self::FullLaplace => "laplace",
        }
    }
}

/// Full description of one synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub k: usize,
    pub n_samples: usize,
    pub class_prior: Prior,
    /// `T + 1` classifiers; after ordering, the first plays the initial
    /// annotator.
    pub classifiers: Vec<ClassifierSpec>,
    pub ordering: ModelOrdering,
    pub budget_fraction: f64,
    pub select_policy: SelectionPolicy,
    pub update_policies: Vec<UpdateRule>,
    pub estimator: Estimator,
    /// Labelled source samples per class for estimation.
    pub source_split_n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidClassCount(self.k));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidScenario("n_samples must be positive".into()));
        }
        if self.classifiers.len() < 2 {
            return Err(Error::InvalidScenario(
                "need at least two classifiers (the initial one plus one update)".into(),
            ));
        }
        for c in &self.classifiers {
            c.expand(self.k)?;
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(Error::InvalidScenario(alloc::format!(
                "budget_fraction {} outside (0, 1]",
                self.budget_fraction
            )));
        }
        if self.update_policies.is_empty() {
            return Err(Error::InvalidScenario("no update policies".into()));
        }
        let mut labels: Vec<String> = self.update_policies.iter().map(|p| p.label()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.update_policies.len() {
            return Err(Error::InvalidScenario("duplicate update policy".into()));
        }
        if self.estimator != Estimator::Known && self.source_split_n == 0 {
            return Err(Error::InvalidScenario(
                "source_split_n must be positive unless the estimator is `known`".into(),
            ));
        }
        self.class_prior.distribution(self.k).map(|_| ())
    }

    /// Number of update steps (classifiers after the initial one).
    pub fn t(&self) -> usize {
        self.classifiers.len() - 1
    }
}

/// Per-sample entropy and correctness after one time index, for histogram
/// export.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub sample: SampleId,
    pub entropy: f64,
    pub stored: ClassId,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySnapshot {
    /// Time index: 0 right after the initial batch, then 1..=T.
    pub step: u64,
    pub rows: Vec<EntropyRow>,
}

/// Everything one update policy produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub report: RunReport,
    pub final_labels: BTreeMap<SampleId, ClassId>,
    pub entropy_trace: Vec<EntropySnapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub truth: BTreeMap<SampleId, ClassId>,
    /// Empirical target-set accuracy of each ordered classifier's batch.
    pub classifier_accuracies: Vec<f64>,
    /// Resolved per-step budget.
    pub budget: usize,
    /// Keyed by update-policy label.
    pub runs: BTreeMap<String, PolicyRun>,
}

/// Draw `n` ground-truth labels. Ids are zero-padded so lexicographic and
/// numeric order agree.
pub fn sample_truth(
    n: usize,
    k: usize,
    class_prior: &Prior,
    seed: u64,
) -> Result<BTreeMap<SampleId, ClassId>> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let weights = class_prior.distribution(k)?;
    let width = (n - 1).max(1).to_string().len();
    let mut rng = Rng::new(seed);
    let mut out = BTreeMap::new();
    for i in 0..n {
        let id = SampleId::new(alloc::format!("s{i:0width$}"))?;
        out.insert(id, ClassId(rng.sample_index(&weights)));
    }
    Ok(out)
}

/// Draw one hard-label prediction per sample from the classifier's
/// confusion column for the sample's true class.
pub fn sample_predictions(
    truth: &BTreeMap<SampleId, ClassId>,
    cm: &ConfusionMatrix,
    seed: u64,
    step: u64,
) -> Result<PredictionBatch> {
    let k = cm.k();
    let columns: Vec<Vec<f64>> = (0..k).map(|j| cm.column(j).collect()).collect();
    let mut rng = Rng::new(seed);
    let mut batch = PredictionBatch::new(step);
    for (id, y) in truth {
        y.check(k)?;
        let pred = rng.sample_index(&columns[y.0]);
        batch
            .entries
            .insert(id.clone(), Prediction::Hard(ClassId(pred)));
    }
    Ok(batch)
}

/// Arrange the classifier sequence.
pub fn order_classifiers(
    mut specs: Vec<ClassifierSpec>,
    ordering: &ModelOrdering,
) -> Vec<ClassifierSpec> {
    match ordering {
        ModelOrdering::Improving => {
            specs.sort_by(|a, b| a.ordering_accuracy().total_cmp(&b.ordering_accuracy()));
        }
        ModelOrdering::Adversarial => {
            specs.sort_by(|a, b| b.ordering_accuracy().total_cmp(&a.ordering_accuracy()));
        }
        ModelOrdering::Random { seed } => {
            let mut rng = Rng::new(rng::derive_seed(*seed, rng::tags::ORDER, 0));
            rng.shuffle(&mut specs);
        }
    }
    specs
}

/// Run the scenario once per update policy over shared truth, estimates,
/// and prediction streams.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    spec.validate()?;
    let k = spec.k;
    let t_steps = spec.t();

    let truth = sample_truth(
        spec.n_samples,
        k,
        &spec.class_prior,
        rng::derive_seed(spec.seed, rng::tags::TRUTH, 0),
    )?;
    let ordered = order_classifiers(spec.classifiers.clone(), &spec.ordering);

    let mut batches = Vec::with_capacity(ordered.len());
    let mut estimates = Vec::with_capacity(ordered.len());
    let mut classifier_accuracies = Vec::with_capacity(ordered.len());
    for (t, classifier) in ordered.iter().enumerate() {
        let true_cm = classifier.expand(k)?;
        estimates.push(estimate_for(spec, &true_cm, t as u64)?);
        let batch = sample_predictions(
            &truth,
            &true_cm,
            rng::derive_seed(spec.seed, rng::tags::PREDICTIONS, t as u64),
            t as u64,
        )?;
        classifier_accuracies.push(batch.accuracy_against(&truth));
        batches.push(batch);
    }

    let budget = strategy::resolve_budget(spec.budget_fraction, spec.n_samples)?;
    let sample_ids: Vec<SampleId> = truth.keys().cloned().collect();

    let run_one = |rule: &UpdateRule| -> Result<(String, PolicyRun)> {
        let policy = rule.resolve(Some(&truth))?;
        let mut store = LabelStore::new(k, sample_ids.clone(), &Prior::Uniform)?;
        strategy::initialize_with(&mut store, &batches[0], &estimates[0])?;

        let mut labels_prev = store.stored_labels();
        let initial_accuracy = metrics::accuracy(&labels_prev, &truth)?;
        let mut entropy_trace = Vec::with_capacity(t_steps + 1);
        entropy_trace.push(entropy_snapshot(&store, &truth, 0));

        let mut steps = Vec::with_capacity(t_steps);
        for t in 1..=t_steps {
            strategy::run_step(
                &mut store,
                &batches[t],
                &estimates[t],
                &spec.select_policy,
                &policy,
                budget,
            )?;
            let labels_now = store.stored_labels();
            steps.push(metrics::step_metrics(
                &labels_prev,
                &labels_now,
                &truth,
                t as u64,
            )?);
            labels_prev = labels_now;
            entropy_trace.push(entropy_snapshot(&store, &truth, t as u64));
        }
        let report = metrics::finalize(steps, initial_accuracy, spec.n_samples, t_steps)?;
        Ok((
            rule.label(),
            PolicyRun {
                report,
                final_labels: labels_prev,
                entropy_trace,
            },
        ))
    };

    #[cfg(feature = "parallel")]
    let collected: Result<Vec<(String, PolicyRun)>> =
        spec.update_policies.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let collected: Result<Vec<(String, PolicyRun)>> =
        spec.update_policies.iter().map(run_one).collect();

    Ok(ScenarioResult {
        truth,
        classifier_accuracies,
        budget,
        runs: collected?.into_iter().collect(),
    })
}

fn estimate_for(spec: &ScenarioSpec, true_cm: &ConfusionMatrix, t: u64) -> Result<ConfusionMatrix> {
    if spec.estimator == Estimator::Known {
        return Ok(true_cm.clone());
    }
    // A fresh labelled source split per classifier, balanced across
    // classes, disjoint from the target by construction.
    let k = spec.k;
    let columns: Vec<Vec<f64>> = (0..k).map(|j| true_cm.column(j).collect()).collect();
    let mut rng = Rng::new(rng::derive_seed(spec.seed, rng::tags::SOURCE, t));
    let mut truths = Vec::with_capacity(k * spec.source_split_n);
    let mut preds = Vec::with_capacity(k * spec.source_split_n);
    for (c, column) in columns.iter().enumerate() {
        for _ in 0..spec.source_split_n {
            truths.push(ClassId(c));
            preds.push(ClassId(rng.sample_index(column)));
        }
    }
    match spec.estimator {
        Estimator::Diagonal => crate::confusion::estimate_diagonal(&preds, &truths, k),
        Estimator::FullLaplace => crate::confusion::estimate_full_laplace(&preds, &truths, k),
        Estimator::Known => unreachable!(),
    }
}

fn entropy_snapshot(
    store: &LabelStore,
    truth: &BTreeMap<SampleId, ClassId>,
    step: u64,
) -> EntropySnapshot {
    EntropySnapshot {
        step,
        rows: store
            .records()
            .map(|(id, r)| EntropyRow {
                sample: id.clone(),
                entropy: r.entropy,
                stored: r.stored_label,
                correct: truth.get(id) == Some(&r.stored_label),
            })
            .collect(),
    }
}
