//! Posterior recursion over confusion-matrix likelihoods, its soft-label
//! variant, Shannon entropy, and MAP extraction.
//!
//! A posterior `p` over the true label is multiplied elementwise by the
//! likelihood of the observed prediction and renormalized. For a hard
//! observation `i` the likelihood for candidate class `j` is `π(i, j)`;
//! for a soft observation it is the mixture `Σ_i soft[i]·π(i, j)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::types::{validate_distribution, ClassId, ConfusionMatrix, Prediction, INPUT_SUM_TOL};

/// Below this unnormalized sum the update is recomputed in log space.
const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Shannon entropy in nats, with `0·ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &v in p {
        if v > 0.0 {
            acc -= v * math::ln(v);
        }
    }
    acc.max(0.0)
}

/// Lowest index attaining the maximum.
pub fn map_label(p: &[f64]) -> ClassId {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in p.iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    ClassId(best)
}

/// One Bayes step for a hard observation.
pub fn posterior_update(
    posterior: &[f64],
    cm: &ConfusionMatrix,
    observed: ClassId,
) -> Result<Vec<f64>> {
    let k = cm.k();
    observed.check(k)?;
    if posterior.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: posterior.len(),
        });
    }
    combine(posterior, cm.row(observed.0))
}

/// One Bayes step for a soft observation: the likelihood factor for class
/// `j` is `Σ_i soft[i]·π(i, j)`.
pub fn posterior_update_soft(
    posterior: &[f64],
    cm: &ConfusionMatrix,
    soft: &[f64],
) -> Result<Vec<f64>> {
    let k = cm.k();
    validate_distribution(soft, k, INPUT_SUM_TOL)?;
    if posterior.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: posterior.len(),
        });
    }
    combine(posterior, &soft_factors(cm, soft))
}

fn soft_factors(cm: &ConfusionMatrix, soft: &[f64]) -> Vec<f64> {
    let k = cm.k();
    let mut factors = alloc::vec![0.0; k];
    for (i, &w) in soft.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (j, &pi) in cm.row(i).iter().enumerate() {
            factors[j] += w * pi;
        }
    }
    factors
}

/// Elementwise product with renormalization; falls back to log space when
/// the unnormalized sum underflows.
fn combine(posterior: &[f64], factors: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = posterior
        .iter()
        .zip(factors)
        .map(|(&p, &f)| p * f)
        .collect();
    let sum: f64 = out.iter().sum();
    if sum >= UNDERFLOW_FLOOR {
        for v in &mut out {
            *v /= sum;
        }
        return Ok(out);
    }
    // Log-space rescue: log-prior plus log-likelihood, shift by the max,
    // exponentiate, normalize.
    let logs: Vec<f64> = posterior
        .iter()
        .zip(factors)
        .map(|(&p, &f)| math::ln(p) + math::ln(f))
        .collect();
    normalize_logs(&logs)
}

fn normalize_logs(logs: &[f64]) -> Result<Vec<f64>> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::DegeneratePosterior);
    }
    let mut out: Vec<f64> = logs.iter().map(|&l| math::exp(l - max)).collect();
    let sum: f64 = out.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegeneratePosterior);
    }
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Recompute a posterior from the prior and the full factor list in one
/// log-space pass. Serves as the independent oracle for the iterative
/// recursion: the likelihood product commutes, so any factor order agrees.
pub fn replay_posterior(
    prior: &[f64],
    factors: &[(ConfusionMatrix, Prediction)],
) -> Result<Vec<f64>> {
    if factors.is_empty() {
        return Ok(prior.to_vec());
    }
    let k = prior.len();
    let mut logs: Vec<f64> = prior.iter().map(|&p| math::ln(p)).collect();
    for (cm, obs) in factors {
        if cm.k() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: cm.k(),
            });
        }
        obs.validate(k)?;
        match obs {
            Prediction::Hard(c) => {
                for (j, &pi) in cm.row(c.0).iter().enumerate() {
                    logs[j] += math::ln(pi);
                }
            }
            Prediction::Soft(soft) => {
                for (j, f) in soft_factors(cm, soft).into_iter().enumerate() {
                    logs[j] += math::ln(f);
                }
            }
        }
    }
    normalize_logs(&logs)
}
