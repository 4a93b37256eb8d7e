use alloc::vec::Vec;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::seed;

/// Balanced training resamples, as sorted row indices into the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Undersampled {
    pub sets: Vec<Vec<usize>>,
    /// Set when there were too few negatives and the full data was returned.
    pub warning: bool,
}

/// Draws `times` sets, each holding every positive row plus
/// `round(ratio * positives)` negatives sampled without replacement.
/// Resample `r` uses seed `seed + r`.
pub fn undersample(labels: &[bool], times: usize, ratio: f64, seed: u64) -> Result<Undersampled> {
    if times == 0 || !(ratio > 0.0) {
        return Err(Error::config("undersample needs times >= 1 and ratio > 0"));
    }
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let negatives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::DegenerateTarget);
    }
    let wanted = libm::round(ratio * positives.len() as f64) as usize;
    if negatives.len() < wanted {
        return Ok(Undersampled {
            sets: alloc::vec![(0..labels.len()).collect()],
            warning: true,
        });
    }
    let sets = (0..times as u64)
        .map(|r| {
            let mut rng = seed::rng(seed::derive(seed.wrapping_add(r), "undersample"));
            let mut rows = positives.clone();
            rows.extend(
                index::sample(&mut rng, negatives.len(), wanted)
                    .into_iter()
                    .map(|k| negatives[k]),
            );
            rows.sort_unstable();
            rows
        })
        .collect();
    Ok(Undersampled {
        sets,
        warning: false,
    })
}
