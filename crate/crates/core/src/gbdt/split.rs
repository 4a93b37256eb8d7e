use serde::{Deserialize, Serialize};

use super::bundle::BinnedDataset;

/// Gradient sums on one side of a candidate split. `sum_a` and `sum_b` are
/// the plain sums over the rows from the top-gradient set and from the random
/// draw; `count` is the unweighted number of rows.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SideSums {
    pub sum_a: f64,
    pub sum_b: f64,
    pub count: usize,
}

/// Projected variance gain of a split,
/// `(1/n) [ (A_l + amp B_l)^2 / n_l + (A_r + amp B_r)^2 / n_r ]`.
/// `None` when a side is empty.
pub fn variance_gain(left: &SideSums, right: &SideSums, amplification: f64, n: usize) -> Option<f64> {
    if left.count == 0 || right.count == 0 {
        return None;
    }
    Some(gain_from_sums(
        left.sum_a + amplification * left.sum_b,
        left.count,
        right.sum_a + amplification * right.sum_b,
        right.count,
        n,
    ))
}

#[inline]
pub(crate) fn gain_from_sums(gl: f64, nl: usize, gr: f64, nr: usize, n: usize) -> f64 {
    (gl * gl / nl as f64 + gr * gr / nr as f64) / n as f64
}

/// One histogram cell: weighted gradient sum and unweighted row count.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HistBin {
    pub grad: f64,
    pub count: u32,
}

/// Accumulates a flat histogram over `rows` (ascending), one bundle at a
/// time in row order.
pub fn build_histogram(data: &BinnedDataset, rows: &[u32], weighted_grad: &[f64]) -> alloc::vec::Vec<HistBin> {
    let mut hist = alloc::vec![HistBin::default(); data.hist_len];
    for (b, col) in data.columns.iter().enumerate() {
        let h = &mut hist[data.hist_offsets[b]..];
        for &r in rows {
            let cell = &mut h[usize::from(col[r as usize])];
            cell.grad += weighted_grad[r as usize];
            cell.count += 1;
        }
    }
    hist
}

/// `parent - child`, cell by cell.
pub fn subtract_histogram(parent: &[HistBin], child: &[HistBin]) -> alloc::vec::Vec<HistBin> {
    parent
        .iter()
        .zip(child)
        .map(|(p, c)| HistBin {
            grad: p.grad - c.grad,
            count: p.count - c.count,
        })
        .collect()
}

/// Best split of one node: `(feature, bin)` sends bins `<= bin` left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitChoice {
    pub feature: usize,
    pub bin: u16,
    /// Projected variance gain of the split itself.
    pub value: f64,
    /// `value` minus the node's unsplit term; the leaf-wise priority.
    pub improvement: f64,
    pub left_grad: f64,
    pub left_count: usize,
}

/// Scans every feature's bins for the split maximizing the projected
/// variance gain, subject to `min_data` rows on each side. Ties keep the
/// lower feature, then the lower bin.
pub fn find_best_split(
    data: &BinnedDataset,
    hist: &[HistBin],
    node_grad: f64,
    node_count: usize,
    n_total: usize,
    min_data: usize,
) -> Option<SplitChoice> {
    let mut best: Option<SplitChoice> = None;
    for f in 0..data.n_features() {
        let slot = data.slots[f];
        let member = &data.bundles[slot.bundle].members[slot.member];
        let nb = usize::from(member.n_bins);
        if nb < 2 {
            continue;
        }
        let h = &hist[data.hist_offsets[slot.bundle]..];
        // The default bin is never stored; it is whatever the node total
        // leaves over.
        let default = member.default_bin.map(|d| {
            let (mut g, mut c) = (0.0, 0u32);
            for b in (0..nb as u16).filter(|&b| b != d) {
                let cell = h[usize::from(member.encode(b).unwrap_or(0))];
                g += cell.grad;
                c += cell.count;
            }
            (d, node_grad - g, node_count as u32 - c)
        });
        let cell = |b: u16| -> (f64, u32) {
            match (default, member.encode(b)) {
                (Some((d, g, c)), _) if d == b => (g, c),
                (_, Some(m)) => {
                    let x = h[usize::from(m)];
                    (x.grad, x.count)
                }
                _ => (0.0, 0),
            }
        };
        let (mut gl, mut nl) = (0.0, 0usize);
        for b in 0..(nb - 1) as u16 {
            let (g, c) = cell(b);
            gl += g;
            nl += c as usize;
            let nr = node_count - nl;
            if nl < min_data || nr < min_data {
                continue;
            }
            let gr = node_grad - gl;
            let value = gain_from_sums(gl, nl, gr, nr, n_total);
            if best.map_or(true, |s| value > s.value) {
                best = Some(SplitChoice {
                    feature: f,
                    bin: b,
                    value,
                    improvement: value - node_grad * node_grad / node_count as f64 / n_total as f64,
                    left_grad: gl,
                    left_count: nl,
                });
            }
        }
    }
    best
}
