//! Early-warning pipeline for Acute Hypotensive Episodes (AHE) and
//! Tachycardia Episodes (TE) on minute-resolution ICU vital signs.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic stage:
//!
//! * [`ingest`]: window segmentation, validity screening, episode labeling,
//!   patient folds, undersampling and a synthetic cohort generator.
//! * [`features`]: the 111-dimensional observation-window feature vector.
//! * [`selection`]: binned mutual information, threshold ranking and greedy
//!   joint-MI forward selection.
//! * [`gbdt`]: histogram gradient-boosted trees with GOSS, leaf-wise growth
//!   and exclusive feature bundling; [`nb`] is the Gaussian naive Bayes
//!   baseline.
//! * [`metrics`]: event recall, reduced precision, event F1, false-alarm and
//!   anticipation-time statistics.
//! * [`tuning`] and [`pipeline`]: random search and the per-fold
//!   cross-validation procedure.
//!
//! File formats, wall-clock timing and threading live in the `ews` crate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod features;
pub mod gbdt;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod nb;
pub mod pipeline;
pub mod seed;
pub mod selection;
pub mod tuning;

pub use error::{Error, Result};
pub use matrix::{FeatureMatrix, Provenance};
