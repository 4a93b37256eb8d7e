//! Gaussian naive Bayes baseline.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Class-conditional Gaussians; index 0 is the negative class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub feature_names: Vec<String>,
    pub priors: [f64; 2],
    pub means: Vec<[f64; 2]>,
    pub variances: Vec<[f64; 2]>,
}

pub fn train_nb(x: &FeatureMatrix) -> Result<NbModel> {
    x.check_finite()?;
    let y = x.y();
    let mut counts = [0usize; 2];
    for &v in y {
        counts[usize::from(v)] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateTarget);
    }
    let n = x.n_rows() as f64;
    let mut means = Vec::with_capacity(x.n_features());
    let mut variances = Vec::with_capacity(x.n_features());
    for j in 0..x.n_features() {
        let mut sum = [0.0; 2];
        for (i, &v) in y.iter().enumerate() {
            sum[usize::from(v)] += x.get(i, j);
        }
        let mean = [sum[0] / counts[0] as f64, sum[1] / counts[1] as f64];
        let mut ss = [0.0; 2];
        for (i, &v) in y.iter().enumerate() {
            let c = usize::from(v);
            let d = x.get(i, j) - mean[c];
            ss[c] += d * d;
        }
        means.push(mean);
        variances.push([
            (ss[0] / counts[0] as f64).max(VARIANCE_FLOOR),
            (ss[1] / counts[1] as f64).max(VARIANCE_FLOOR),
        ]);
    }
    Ok(NbModel {
        feature_names: x.names().to_vec(),
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
    })
}

impl NbModel {
    /// Positive-class posterior for one row in training column order.
    pub fn posterior_row(&self, row: &[f64]) -> f64 {
        let mut log_joint = [libm::log(self.priors[0]), libm::log(self.priors[1])];
        for ((&v, m), s) in row.iter().zip(&self.means).zip(&self.variances) {
            for c in 0..2 {
                let d = v - m[c];
                log_joint[c] -= 0.5 * (libm::log(2.0 * core::f64::consts::PI * s[c]) + d * d / s[c]);
            }
        }
        let z = log_joint[1] - log_joint[0];
        crate::gbdt::sigmoid(z)
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let x = x.align_to(&self.feature_names)?;
        Ok((0..x.n_rows()).map(|i| self.posterior_row(x.row(i))).collect())
    }
}
