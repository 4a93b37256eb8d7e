/// Pearson correlation of two equal-length slices; 0 when either has no spread.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

/// Maximum over lags `-max_lag..=max_lag` of corr(x_t, y_{t+lag}) on the
/// overlapping samples, with the lag that attains it (first lag wins ties).
pub fn cross_correlation_with_lag(x: &[f64], y: &[f64], max_lag: usize) -> (f64, i64) {
    let n = x.len().min(y.len());
    let max_lag = max_lag.min(n.saturating_sub(2)) as i64;
    let mut best = (f64::NEG_INFINITY, 0);
    for lag in -max_lag..=max_lag {
        let r = if lag >= 0 {
            let l = lag as usize;
            pearson(&x[..n - l], &y[l..n])
        } else {
            let l = (-lag) as usize;
            pearson(&x[l..n], &y[..n - l])
        };
        if r > best.0 {
            best = (r, lag);
        }
    }
    best
}

pub fn cross_correlation(x: &[f64], y: &[f64], max_lag: usize) -> f64 {
    cross_correlation_with_lag(x, y, max_lag).0
}
