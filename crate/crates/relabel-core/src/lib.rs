//! Maintains best-guess class labels for a large unlabelled dataset as a
//! sequence of classifiers arrives over time.
//!
//! The core loop: every sample carries a posterior distribution over its
//! (unknown) true label. When a new classifier's predictions come in, a
//! budgeted subset of samples is selected for re-evaluation (highest
//! posterior entropy first, or at random), each selected posterior is
//! updated through the classifier's confusion-matrix likelihood, and an
//! update rule decides whether the stored label changes. Conservative
//! rules trade a little accuracy for far fewer negative flips (stored
//! labels going from correct to incorrect).
//!
//! This crate is `no_std`-compatible (`alloc` required; enable the `libm`
//! feature for float math without `std`). File formats, persistence, and
//! the command-line interface live in the companion `relabel` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("relabel-core requires either the `std` or the `libm` feature");

pub mod bayes;
pub mod confusion;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod snapshot;
pub mod store;
pub mod strategy;
pub mod types;

mod math;

pub use error::{Error, Result};
pub use store::{LabelStore, PosteriorRecord};
pub use types::{ClassId, ConfusionMatrix, Prediction, PredictionBatch, Prior, SampleId};
