use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binned estimator settings. Logarithms are natural (nats).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiEstimatorConfig {
    pub bins: usize,
}

impl Default for MiEstimatorConfig {
    fn default() -> Self {
        Self { bins: 16 }
    }
}

impl MiEstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::config("MI estimator needs at least 2 bins"));
        }
        Ok(())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n < 2 * self.bins {
            return Err(Error::TooFewSamples {
                needed: 2 * self.bins,
                got: n,
            });
        }
        Ok(())
    }
}

/// Equal-frequency discretization: cut points are the order statistics at
/// ranks `floor(q n / bins)`, q = 1..bins-1 (duplicates merged); a value's
/// label is the number of cut points not above it. Tied values always share
/// a label.
pub fn equal_frequency_labels(x: &[f64], bins: usize) -> Vec<u32> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut cuts: Vec<f64> = (1..bins).map(|q| sorted[(q * n / bins).min(n - 1)]).collect();
    cuts.dedup();
    x.iter()
        .map(|v| cuts.partition_point(|c| c <= v) as u32)
        .collect()
}

pub(crate) fn bool_labels(y: &[bool]) -> Vec<u32> {
    y.iter().map(|&b| u32::from(b)).collect()
}

/// Plug-in mutual information of two label sequences. Terms are summed in
/// sorted order so the estimate is exactly symmetric in its arguments.
pub fn mi_from_labels(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let na = a.iter().max().map_or(0, |&m| m as usize + 1);
    let nb = b.iter().max().map_or(0, |&m| m as usize + 1);
    let mut joint = alloc::vec![0u64; na * nb];
    let mut ca = alloc::vec![0u64; na];
    let mut cb = alloc::vec![0u64; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i as usize * nb + j as usize] += 1;
        ca[i as usize] += 1;
        cb[j as usize] += 1;
    }
    let nf = n as f64;
    let mut terms: Vec<f64> = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            let expected = (ca[i] as f64) * (cb[j] as f64);
            terms.push(c / nf * libm::log(c * nf / expected));
        }
    }
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().max(0.0)
}

/// Plug-in entropy of a label sequence, in nats.
pub fn entropy_labels(a: &[u32]) -> f64 {
    mi_from_labels(a, a)
}

/// I(x; y) for a continuous feature and a binary target.
pub fn mutual_information(x: &[f64], y: &[bool], cfg: &MiEstimatorConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    cfg.check_len(x.len())?;
    Ok(mi_from_labels(
        &equal_frequency_labels(x, cfg.bins),
        &bool_labels(y),
    ))
}

/// I(x; z) for two continuous features, both binned.
pub fn mutual_information_between(x: &[f64], z: &[f64], cfg: &MiEstimatorConfig) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    cfg.check_len(x.len())?;
    Ok(mi_from_labels(
        &equal_frequency_labels(x, cfg.bins),
        &equal_frequency_labels(z, cfg.bins),
    ))
}

/// I(a; b | y) = sum over classes of p(y) I(a; b within class) on labels
/// binned over the whole column.
pub fn conditional_mi_labels(a: &[u32], b: &[u32], y: &[bool]) -> f64 {
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for class in [false, true] {
        let (sa, sb): (Vec<u32>, Vec<u32>) = (0..n)
            .filter(|&i| y[i] == class)
            .map(|i| (a[i], b[i]))
            .unzip();
        if sa.is_empty() {
            continue;
        }
        total += sa.len() as f64 / n as f64 * mi_from_labels(&sa, &sb);
    }
    total
}

pub fn conditional_mi(xi: &[f64], xj: &[f64], y: &[bool], cfg: &MiEstimatorConfig) -> Result<f64> {
    if xi.len() != xj.len() || xi.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: xi.len(),
            got: xj.len().min(y.len()),
        });
    }
    cfg.check_len(xi.len())?;
    Ok(conditional_mi_labels(
        &equal_frequency_labels(xi, cfg.bins),
        &equal_frequency_labels(xj, cfg.bins),
        y,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg() -> MiEstimatorConfig {
        MiEstimatorConfig::default()
    }

    #[test]
    fn copy_of_balanced_binary_is_ln2() {
        let y: Vec<bool> = (0..1000).map(|i| i % 2 == 0).collect();
        let x: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
        let mi = mutual_information(&x, &y, &cfg()).unwrap();
        assert!((mi - core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn independent_uniform_joint_is_zero() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (a, b) in [(0.0, false), (0.0, true), (1.0, false), (1.0, true)] {
            for _ in 0..250 {
                x.push(a);
                y.push(b);
            }
        }
        assert!(mutual_information(&x, &y, &cfg()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn exact_counts_joint() {
        // p = [[0.4, 0.1], [0.1, 0.4]] as counts x 1000.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (a, b, c) in [(0.0, false, 400), (0.0, true, 100), (1.0, false, 100), (1.0, true, 400)] {
            for _ in 0..c {
                x.push(a);
                y.push(b);
            }
        }
        let analytic = 0.8 * libm::log(1.6) + 0.2 * libm::log(0.4);
        let mi = mutual_information(&x, &y, &cfg()).unwrap();
        assert!((mi - 0.19275).abs() < 1e-3);
        assert!((mi - analytic).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_and_short_input() {
        let y: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
        assert_eq!(mutual_information(&[5.0; 64], &y, &cfg()).unwrap(), 0.0);
        assert!(mutual_information(&[1.0; 31], &y[..31], &cfg()).is_err());
    }

    #[test]
    fn equal_frequency_bins_are_balanced() {
        let x: Vec<f64> = (0..160).map(f64::from).collect();
        let labels = equal_frequency_labels(&x, 16);
        for b in 0..16u32 {
            assert_eq!(labels.iter().filter(|&&l| l == b).count(), 10);
        }
    }

    #[test]
    fn conditional_mi_cases() {
        let mut rng = seed::rng(8);
        let n = 4000;
        let y: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let xi: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let xj: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        // Independent within each class: only the plug-in bias remains,
        // about (bins - 1)^2 / (2 n_class) per stratum.
        let bias = 225.0 / n as f64;
        assert!(conditional_mi(&xi, &xj, &y, &cfg()).unwrap() < 1.5 * bias);

        // Identity case equals H(binned xi | y), computed independently.
        let labels = equal_frequency_labels(&xi, 16);
        let mut h = 0.0;
        for class in [false, true] {
            let sub: Vec<u32> = (0..n).filter(|&i| y[i] == class).map(|i| labels[i]).collect();
            let mut counts = [0usize; 16];
            for &l in &sub {
                counts[l as usize] += 1;
            }
            let m = sub.len() as f64;
            let hc: f64 = counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| -(c as f64 / m) * libm::log(c as f64 / m))
                .sum();
            h += m / n as f64 * hc;
        }
        assert!((conditional_mi(&xi, &xi, &y, &cfg()).unwrap() - h).abs() < 1e-12);

        // Constant class: a single stratum.
        let ones = vec![true; n];
        let plain = mutual_information_between(&xi, &xj, &cfg()).unwrap();
        assert_eq!(conditional_mi(&xi, &xj, &ones, &cfg()).unwrap(), plain);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(seed in 0u64..5000) {
            let mut rng = seed::rng(seed);
            let n = 200;
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let z: Vec<f64> = x.iter().map(|v| v * v + 0.3 * rng.gen::<f64>()).collect();
            let a = mutual_information_between(&x, &z, &cfg()).unwrap();
            let b = mutual_information_between(&z, &x, &cfg()).unwrap();
            prop_assert_eq!(a, b);
            let hx = entropy_labels(&equal_frequency_labels(&x, 16));
            let hz = entropy_labels(&equal_frequency_labels(&z, 16));
            prop_assert!(a >= 0.0 && a <= hx.min(hz) + 1e-12);
        }
    }
}
