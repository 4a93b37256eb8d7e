//! Mutual-information feature selection.
//!
//! Two modes: threshold ranking (normalize each feature's I(x; y) by the
//! total and keep those with at least the threshold share) and greedy joint
//! mutual information with redundancy penalties.

mod greedy;
mod mi;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::FeatureMatrix;

pub use greedy::{greedy_jmi_select, GreedyConfig, RedundancyWeights, SelectedSubset};
pub use mi::{
    conditional_mi, conditional_mi_labels, entropy_labels, equal_frequency_labels,
    mi_from_labels, mutual_information, mutual_information_between, MiEstimatorConfig,
};

/// Per-feature raw MI (nats), normalized importance, and the kept columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigRanking {
    pub raw: Vec<f64>,
    pub importance: Vec<f64>,
    pub selected: Vec<usize>,
    pub warning: Option<String>,
}

pub fn rank_by_mig(
    features: &FeatureMatrix,
    cfg: &MiEstimatorConfig,
    threshold: f64,
) -> Result<MigRanking> {
    let y = features.y();
    let raw = (0..features.n_features())
        .map(|j| mutual_information(&features.column(j), y, cfg))
        .collect::<Result<Vec<f64>>>()?;
    Ok(rank_raw(raw, threshold))
}

/// Normalizes raw scores and applies the threshold.
pub fn rank_raw(raw: Vec<f64>, threshold: f64) -> MigRanking {
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return MigRanking {
            importance: alloc::vec![0.0; raw.len()],
            raw,
            selected: Vec::new(),
            warning: Some(String::from("all mutual information estimates are zero")),
        };
    }
    let importance: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let selected: Vec<usize> = (0..raw.len()).filter(|&j| importance[j] >= threshold).collect();
    let warning = selected
        .is_empty()
        .then(|| String::from("no feature reaches the importance threshold"));
    MigRanking {
        raw,
        importance,
        selected,
        warning,
    }
}
