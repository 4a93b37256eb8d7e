//! Turning per-patient vitals into labeled sub-sequences.
//!
//! A sub-sequence is an Observation Window (features), followed by a Warning
//! Window (mandatory lead time), followed by a Target Window (where the
//! episode is looked for). Sub-sequences start every `stride` minutes.

mod folds;
mod record;
mod synth;
mod undersample;
mod window;

pub use folds::{make_folds, FoldPlan};
pub use record::{Sample, VitalsRecord, VALID_RANGE};
pub use synth::{
    generate_synthetic_cohort, EpisodeInterval, EpisodeKind, SynthConfig, SyntheticCohort,
};
pub use undersample::{undersample, Undersampled};
pub use window::{
    label_ahe, label_te, segment, validate_observation_window, validate_target_window,
    SignalWindow, SubSequence, Task, WindowConfig,
};
