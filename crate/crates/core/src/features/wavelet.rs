use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of decomposition levels.
pub const LEVELS: usize = 5;

/// Low-pass analysis filter for the decomposition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletFilter {
    /// 62-tap discrete Meyer approximation, adjusted (max tap change 8.1e-4)
    /// to be exactly orthonormal to its even shifts.
    #[default]
    Meyer,
    /// Daubechies 4 (8 taps).
    Daubechies4,
}

impl WaveletFilter {
    pub fn low_pass(&self) -> &'static [f64] {
        match self {
            WaveletFilter::Meyer => &MEYER_ORTHONORMAL,
            WaveletFilter::Daubechies4 => &DB4,
        }
    }
}

#[rustfmt::skip]
const MEYER_ORTHONORMAL: [f64; 62] = [
    8.562630132031744e-07,
    4.147556866416228e-07,
    -7.174723969490187e-06,
    -1.6099032491908823e-06,
    8.868518926490402e-06,
    -1.174394089497951e-05,
    1.1497621506753411e-05,
    3.1588623347065164e-05,
    -1.1636424639993314e-05,
    -1.2519109809844203e-05,
    5.8204912560989286e-05,
    3.8262276048636004e-05,
    -0.00022312281446625095,
    -6.59710093585882e-05,
    0.0002442239556452202,
    0.0006239763541653801,
    -0.0003378123067367854,
    -0.002750650217925466,
    0.0020712866899210047,
    0.006119260353576613,
    -0.006345697353667822,
    -0.01106799981920869,
    0.015194664673830776,
    0.0174575012385654,
    -0.03209495076433165,
    -0.024319469057926188,
    0.06363331761570878,
    0.030654984314703194,
    -0.13271256125905828,
    -0.03503315492022968,
    0.444070547305093,
    0.7437776121316677,
    0.44407070605686605,
    -0.03503280540763059,
    -0.1327126196302745,
    0.030655794631458073,
    0.06363261372151796,
    -0.024319726244070403,
    -0.032095157844452285,
    0.017456241500595604,
    0.015194060654595153,
    -0.011070772850831788,
    -0.006344125532631809,
    0.00611798153106059,
    0.0020780194903923885,
    -0.0027500743402601416,
    -0.0003293007192619726,
    0.0006226510415971309,
    0.0002498386956186218,
    -7.293356475263366e-05,
    -0.00020589460605609044,
    3.4374486561437537e-05,
    6.296963325440287e-05,
    3.780466159180629e-05,
    -3.134910918931657e-05,
    -3.907655461599501e-05,
    -1.8328164437056377e-05,
    2.1752697032033954e-05,
    -4.563243655790984e-06,
    3.848567764251979e-06,
    -6.001250742442299e-07,
    1.238961890197185e-06,
];

#[rustfmt::skip]
const DB4: [f64; 8] = [
    -0.010597401785069032, 0.0328830116668852, 0.030841381835560764, -0.18703481171909309,
    -0.027983769416859854, 0.6308807679298589, 0.7148465705529157, 0.2303778133088965,
];

/// One periodized analysis step: approximation and detail halves.
fn analysis_step(x: &[f64], low: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let taps = low.len();
    let half = n / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (i, &h) in low.iter().enumerate() {
            let v = x[(2 * k + i) % n];
            a += h * v;
            // Quadrature mirror: g[i] = (-1)^i h[L-1-i].
            let g = low[taps - 1 - i];
            d += if i % 2 == 0 { g * v } else { -g * v };
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// Extends `x` to the next multiple of 2^LEVELS by mirroring its tail
/// (…, x[n-2], x[n-1], x[n-1], x[n-2], …).
pub fn pad_symmetric(x: &[f64]) -> Vec<f64> {
    let block = 1 << LEVELS;
    let target = x.len().div_ceil(block) * block;
    let mut out = x.to_vec();
    let mut k = 0;
    while out.len() < target {
        let idx = x.len() - 1 - (k % x.len());
        out.push(x[idx]);
        k += 1;
    }
    out
}

/// Detail bands d1 (finest) .. d5 and the level-5 approximation of the
/// padded series.
pub fn decompose(x: &[f64], filter: WaveletFilter) -> Result<([Vec<f64>; LEVELS], Vec<f64>)> {
    if x.len() < 1 << LEVELS {
        return Err(Error::TooFewSamples {
            needed: 1 << LEVELS,
            got: x.len(),
        });
    }
    let mut approx = pad_symmetric(x);
    let mut details: [Vec<f64>; LEVELS] = Default::default();
    for d in details.iter_mut() {
        let (a, det) = analysis_step(&approx, filter.low_pass());
        *d = det;
        approx = a;
    }
    Ok((details, approx))
}

fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Relative energies of d1..d5; the denominator is the total band energy
/// including the final approximation. An all-zero input yields zeros.
pub fn wavelet_energies(x: &[f64], filter: WaveletFilter) -> Result<[f64; LEVELS]> {
    let (details, approx) = decompose(x, filter)?;
    let band: [f64; LEVELS] = core::array::from_fn(|i| energy(&details[i]));
    let total = band.iter().sum::<f64>() + energy(&approx);
    if total == 0.0 {
        return Ok([0.0; LEVELS]);
    }
    Ok(band.map(|e| e / total))
}
