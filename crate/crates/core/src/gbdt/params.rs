use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub num_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_data_in_leaf: usize,
    /// Added to the leaf row count in the leaf-value denominator.
    pub leaf_regularizer: f64,
    /// Uniform-width bins per feature.
    pub bins: usize,
    /// Fraction of rows kept by largest |gradient|.
    pub goss_a: f64,
    /// Fraction of rows sampled from the remainder.
    pub goss_b: f64,
    /// Leading iterations trained on every row before GOSS starts.
    pub goss_warmup_trees: usize,
    pub efb_enabled: bool,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            num_trees: 300,
            learning_rate: 0.1,
            max_leaves: 31,
            min_data_in_leaf: 20,
            leaf_regularizer: 1.0,
            bins: 255,
            goss_a: 0.2,
            goss_b: 0.1,
            goss_warmup_trees: 1,
            efb_enabled: true,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::config(m));
        if !(self.goss_a > 0.0 && self.goss_a <= 1.0) {
            return fail("goss_a must lie in (0, 1]");
        }
        if !(self.goss_b >= 0.0 && self.goss_b < 1.0) {
            return fail("goss_b must lie in [0, 1)");
        }
        if self.goss_a + self.goss_b > 1.0 + 1e-12 {
            return fail("goss_a + goss_b must not exceed 1");
        }
        if self.bins < 2 || self.bins > usize::from(u16::MAX) {
            return fail("bins must lie in [2, 65535]");
        }
        if self.max_leaves < 2 {
            return fail("max_leaves must be at least 2");
        }
        if self.min_data_in_leaf == 0 {
            return fail("min_data_in_leaf must be at least 1");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return fail("learning_rate must be positive");
        }
        if !(self.leaf_regularizer >= 0.0) || !self.leaf_regularizer.is_finite() {
            return fail("leaf_regularizer must be non-negative");
        }
        Ok(())
    }
}
