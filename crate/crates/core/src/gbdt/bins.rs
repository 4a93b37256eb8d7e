use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Uniform-width binning of one feature over its training range.
/// A value's bin is the number of edges strictly below it, so bin `b`
/// holds `(edges[b-1], edges[b]]`; out-of-range values clamp to the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub min: f64,
    pub max: f64,
    pub edges: Vec<f64>,
}

impl FeatureBins {
    pub fn fit(values: &[f64], bins: usize) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut edges = Vec::new();
        if max > min {
            let width = (max - min) / bins as f64;
            for i in 1..bins {
                let e = min + width * i as f64;
                if e < max && edges.last().map_or(true, |&last| e > last) {
                    edges.push(e);
                }
            }
        }
        Self { min, max, edges }
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn bin(&self, v: f64) -> u16 {
        self.edges.partition_point(|&e| e < v) as u16
    }

    /// Upper boundary value of bin `b` (left side of a split at `b`).
    pub fn threshold(&self, b: u16) -> f64 {
        self.edges[usize::from(b)]
    }

    /// The bin holding 0.0, when 0.0 lies inside the training range of a
    /// feature with at least two bins. Rows in that bin count as "zero" for
    /// exclusive feature bundling.
    pub fn default_bin(&self) -> Option<u16> {
        (self.n_bins() >= 2 && self.min <= 0.0 && 0.0 <= self.max).then(|| self.bin(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub features: Vec<FeatureBins>,
}

impl BinMapper {
    pub fn fit(x: &FeatureMatrix, bins: usize) -> Result<Self> {
        if x.n_rows() == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        x.check_finite()?;
        let features = (0..x.n_features())
            .map(|j| FeatureBins::fit(&x.column(j), bins))
            .collect();
        Ok(Self { features })
    }

    /// Column-major bin indices.
    pub fn transform(&self, x: &FeatureMatrix) -> Vec<Vec<u16>> {
        self.features
            .iter()
            .enumerate()
            .map(|(j, fb)| (0..x.n_rows()).map(|i| fb.bin(x.get(i, j))).collect())
            .collect()
    }
}
