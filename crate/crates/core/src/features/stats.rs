use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Names of the ten per-signal statistics, in output order.
pub const STAT_NAMES: [&str; 10] = [
    "mean", "std", "min", "max", "median", "iqr", "skew", "kurt", "slope", "masd",
];

/// mean, sample standard deviation, min, max, median, interquartile range,
/// skewness, excess kurtosis, least-squares slope per sample, and mean
/// absolute successive difference.
///
/// Skewness and kurtosis use population moments and are 0 for a series with
/// no spread. Quantiles interpolate linearly between order statistics.
pub fn stat_features(x: &[f64]) -> Result<[f64; 10]> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[n - 1]);
    if min == max {
        return Ok([min, 0.0, min, min, min, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = libm::sqrt(m2 / (nf - 1.0));
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / libm::pow(m2, 1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let t_mean = (nf - 1.0) / 2.0;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        let dt = i as f64 - t_mean;
        sxy += dt * (v - mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let masd = x.windows(2).map(|w| libm::fabs(w[1] - w[0])).sum::<f64>() / (nf - 1.0);

    Ok([
        mean,
        sd,
        min,
        max,
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        skew,
        kurt,
        slope,
        masd,
    ])
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
