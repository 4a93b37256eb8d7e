use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::bins::BinMapper;
use super::bundle::{efb_bundle, BinnedDataset, FeatureBundle};
use super::goss::{goss_sample, GossSample};
use super::params::GbdtParams;
use super::tree::{grow_tree, Tree};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::seed;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub version: u32,
    pub params: GbdtParams,
    pub feature_names: Vec<String>,
    /// Log-odds of the training prevalence.
    pub base_score: f64,
    pub bins: BinMapper,
    pub bundles: Vec<FeatureBundle>,
    pub trees: Vec<Tree>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Keeps probabilities strictly inside (0, 1).
fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn logistic_loss(score: f64, y: bool) -> f64 {
    // log(1 + e^s) - y s, written to stay finite for large |s|.
    let softplus = score.max(0.0) + libm::log1p(libm::exp(-libm::fabs(score)));
    softplus - if y { score } else { 0.0 }
}

pub fn mean_logistic_loss(scores: &[f64], y: &[bool]) -> f64 {
    scores.iter().zip(y).map(|(&s, &t)| logistic_loss(s, t)).sum::<f64>() / scores.len() as f64
}

/// Trains on `x` and its labels.
pub fn train_gbdt(x: &FeatureMatrix, params: &GbdtParams) -> Result<GbdtModel> {
    train_gbdt_traced(x, params).map(|(m, _)| m)
}

/// Like [`train_gbdt`], also returning the mean training logistic loss
/// before the first tree and after each tree.
pub fn train_gbdt_traced(x: &FeatureMatrix, params: &GbdtParams) -> Result<(GbdtModel, Vec<f64>)> {
    params.validate()?;
    let n = x.n_rows();
    let y = x.y();
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateTarget);
    }
    let bins = BinMapper::fit(x, params.bins)?;
    let binned = bins.transform(x);
    let bundles = efb_bundle(&binned, &bins, params.efb_enabled);
    let data = BinnedDataset::new(&binned, bundles);
    drop(binned);

    let prevalence = positives as f64 / n as f64;
    let base_score = libm::log(prevalence / (1.0 - prevalence));
    let mut scores = alloc::vec![base_score; n];
    let mut losses = Vec::with_capacity(params.num_trees + 1);
    losses.push(mean_logistic_loss(&scores, y));
    let mut trees = Vec::with_capacity(params.num_trees);
    let mut gradients = alloc::vec![0.0; n];
    for t in 0..params.num_trees {
        // First derivative of the logistic loss in the raw score; the
        // negative of these are the residuals each tree fits.
        for ((g, &s), &label) in gradients.iter_mut().zip(&scores).zip(y) {
            *g = sigmoid(s) - if label { 1.0 } else { 0.0 };
        }
        let sample = if t < params.goss_warmup_trees {
            GossSample::full(n)
        } else {
            let s = seed::derive_indexed(params.seed, "goss", t as u64);
            goss_sample(&gradients, params.goss_a, params.goss_b, s)
        };
        let grown = grow_tree(&data, &bins, &gradients, &sample, params);
        for (s, d) in scores.iter_mut().zip(&grown.row_output) {
            *s += d;
        }
        losses.push(mean_logistic_loss(&scores, y));
        trees.push(grown.tree);
    }
    let model = GbdtModel {
        version: MODEL_VERSION,
        params: params.clone(),
        feature_names: x.names().to_vec(),
        base_score,
        bins,
        bundles: data.bundles,
        trees,
    };
    Ok((model, losses))
}

impl GbdtModel {
    /// Raw scores (log-odds) for rows already in training column order.
    pub fn raw_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    /// Reorders `x` into the training schema; fails listing missing and
    /// unexpected feature names.
    pub fn aligned(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        x.align_to(&self.feature_names)
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let x = self.aligned(x)?;
        Ok((0..x.n_rows()).map(|i| open_unit(sigmoid(self.raw_row(x.row(i))))).collect())
    }

    /// Number of internal nodes splitting on each training feature.
    pub fn split_importance(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.feature_names.len()];
        for f in self.trees.iter().flat_map(|t| t.split_features()) {
            counts[f] += 1;
        }
        counts
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Config(alloc::format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.bins.features.len() != self.feature_names.len() {
            return Err(Error::LengthMismatch {
                expected: self.feature_names.len(),
                got: self.bins.features.len(),
            });
        }
        let nf = self.feature_names.len();
        for tree in &self.trees {
            for node in &tree.nodes {
                if let super::tree::Node::Split { feature, left, right, .. } = node {
                    if *feature >= nf || *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                        return Err(Error::Config("tree node out of range".into()));
                    }
                }
            }
        }
        if !self.base_score.is_finite() {
            return Err(Error::Config("non-finite base score".into()));
        }
        Ok(())
    }
}
