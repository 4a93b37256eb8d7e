use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::mi::{bool_labels, conditional_mi_labels, equal_frequency_labels, mi_from_labels, MiEstimatorConfig};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Weights of the redundancy and class-conditional terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RedundancyWeights {
    Fixed { alpha: f64, beta: f64 },
    /// alpha = beta = 1 / |S| at each step.
    InverseSubsetSize,
}

impl Default for RedundancyWeights {
    fn default() -> Self {
        RedundancyWeights::InverseSubsetSize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub k: usize,
    #[serde(default)]
    pub weights: RedundancyWeights,
}

impl GreedyConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.k == 0 || self.k > n_features {
            return Err(Error::config(alloc::format!(
                "greedy selection needs 1 <= k <= {n_features}, got {}",
                self.k
            )));
        }
        if let RedundancyWeights::Fixed { alpha, beta } = self.weights {
            if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
                return Err(Error::config("alpha and beta must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Ordered picks and the objective value each pick achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSubset {
    pub indices: Vec<usize>,
    pub trace: Vec<f64>,
}

/// Greedy forward selection. Step 1 takes the feature with the largest
/// I(x_i; y); step t takes the unselected i maximizing
/// `I(x_i; y) - [alpha * sum_j I(x_j; x_i) - beta * sum_j I(x_j; x_i | y)]`
/// over the already selected j. Ties go to the lowest index.
pub fn greedy_jmi_select(
    features: &FeatureMatrix,
    mi_cfg: &MiEstimatorConfig,
    cfg: &GreedyConfig,
) -> Result<SelectedSubset> {
    let p = features.n_features();
    cfg.validate(p)?;
    mi_cfg.validate()?;
    let n = features.n_rows();
    if n < 2 * mi_cfg.bins {
        return Err(Error::TooFewSamples {
            needed: 2 * mi_cfg.bins,
            got: n,
        });
    }
    let y = features.y();
    let labels: Vec<Vec<u32>> = (0..p)
        .map(|j| equal_frequency_labels(&features.column(j), mi_cfg.bins))
        .collect();
    let target = bool_labels(y);
    let relevance: Vec<f64> = labels.iter().map(|l| mi_from_labels(l, &target)).collect();

    let mut redundancy = alloc::vec![0.0; p];
    let mut conditional = alloc::vec![0.0; p];
    let mut chosen = alloc::vec![false; p];
    let mut out = SelectedSubset {
        indices: Vec::with_capacity(cfg.k),
        trace: Vec::with_capacity(cfg.k),
    };
    for step in 0..cfg.k {
        let (alpha, beta) = match cfg.weights {
            RedundancyWeights::Fixed { alpha, beta } => (alpha, beta),
            RedundancyWeights::InverseSubsetSize if step == 0 => (0.0, 0.0),
            RedundancyWeights::InverseSubsetSize => (1.0 / step as f64, 1.0 / step as f64),
        };
        let mut best: Option<(usize, f64)> = None;
        for i in (0..p).filter(|&i| !chosen[i]) {
            let score = relevance[i] - (alpha * redundancy[i] - beta * conditional[i]);
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let Some((pick, score)) = best else { break };
        chosen[pick] = true;
        out.indices.push(pick);
        out.trace.push(score);
        for i in (0..p).filter(|&i| !chosen[i]) {
            redundancy[i] += mi_from_labels(&labels[pick], &labels[i]);
            conditional[i] += conditional_mi_labels(&labels[pick], &labels[i], y);
        }
    }
    Ok(out)
}
