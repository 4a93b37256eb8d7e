use alloc::vec::Vec;
use rand::seq::index;

use crate::seed;

/// Rows kept for one tree. `a` holds the largest-|gradient| rows, `b` the
/// random draw from the rest; `b`'s gradients are multiplied by
/// `amplification` in every histogram sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GossSample {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub amplification: f64,
}

impl GossSample {
    /// Every row, unweighted.
    pub fn full(n: usize) -> Self {
        Self {
            a: (0..n).collect(),
            b: Vec::new(),
            amplification: 1.0,
        }
    }

    /// Sampled rows in ascending order with their gradient weights.
    pub fn weighted_rows(&self) -> Vec<(usize, f64)> {
        let mut rows: Vec<(usize, f64)> = self
            .a
            .iter()
            .map(|&i| (i, 1.0))
            .chain(self.b.iter().map(|&i| (i, self.amplification)))
            .collect();
        rows.sort_unstable_by_key(|r| r.0);
        rows
    }
}

fn fraction_count(frac: f64, n: usize) -> usize {
    // The epsilon absorbs representation error in products such as 0.2 * 10.
    (libm::ceil(frac * n as f64 - 1e-9).max(0.0) as usize).min(n)
}

/// Gradient-based one-side sampling: keep the top `ceil(a n)` rows by
/// |gradient| (ties to the lower index), then draw `ceil(b n)` of the
/// remaining rows uniformly without replacement.
pub fn goss_sample(gradients: &[f64], a: f64, b: f64, seed: u64) -> GossSample {
    let n = gradients.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        libm::fabs(gradients[j])
            .total_cmp(&libm::fabs(gradients[i]))
            .then(i.cmp(&j))
    });
    let top = fraction_count(a, n);
    let mut rest: Vec<usize> = order[top..].to_vec();
    rest.sort_unstable();
    let mut top_rows: Vec<usize> = order[..top].to_vec();
    top_rows.sort_unstable();
    let wanted = fraction_count(b, n).min(rest.len());
    let mut rng = seed::rng(seed);
    let mut sampled: Vec<usize> = index::sample(&mut rng, rest.len(), wanted)
        .into_iter()
        .map(|k| rest[k])
        .collect();
    sampled.sort_unstable();
    GossSample {
        a: top_rows,
        b: sampled,
        amplification: if b > 0.0 { (1.0 - a) / b } else { 1.0 },
    }
}
