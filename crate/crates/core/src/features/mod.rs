//! Observation-window features.
//!
//! Layout of the 111-entry vector, in order:
//!
//! | block | count | names |
//! |-------|-------|-------|
//! | statistics | 6 x 10 | `<sig>_<stat>` (signal-major) |
//! | cross-correlation | 15 | `xcorr_<a>_<b>`, a before b in signal order |
//! | wavelet energies | 6 x 5 | `wave_<sig>_d1` .. `wave_<sig>_d5` |
//! | last observed value | 6 | `<sig>_last` |
//!
//! Signal order is `hr, sbp, dbp, map, pp, co`.

mod stats;
mod wavelet;
mod xcorr;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Sample, SignalWindow, SubSequence};
use crate::matrix::{FeatureMatrix, Provenance};

pub use stats::{quantile_sorted, stat_features, STAT_NAMES};
pub use wavelet::{decompose, pad_symmetric, wavelet_energies, WaveletFilter, LEVELS};
pub use xcorr::{cross_correlation, cross_correlation_with_lag, pearson};

pub const SIGNAL_NAMES: [&str; 6] = ["hr", "sbp", "dbp", "map", "pp", "co"];
pub const FEATURE_COUNT: usize = 111;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub max_lag: usize,
    pub wavelet: WaveletFilter,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            max_lag: 10,
            wavelet: WaveletFilter::Meyer,
        }
    }
}

/// The six observation-window series. `pp = sbp - dbp`, `co = hr * pp`
/// (a unitless cardiac-output proxy).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub hr: Vec<f64>,
    pub sbp: Vec<f64>,
    pub dbp: Vec<f64>,
    pub map: Vec<f64>,
    pub pp: Vec<f64>,
    pub co: Vec<f64>,
}

impl SignalSet {
    pub fn signals(&self) -> [&[f64]; 6] {
        [&self.hr, &self.sbp, &self.dbp, &self.map, &self.pp, &self.co]
    }
}

/// Fills missing samples with the previous present value (the first present
/// value for a leading gap). Fails on an entirely missing series.
pub fn fill_gaps(series: &[Sample]) -> Result<Vec<f64>> {
    let first = series
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or_else(|| Error::Record(String::from("observation window signal is entirely missing")))?;
    let mut last = first;
    Ok(series
        .iter()
        .map(|s| {
            if let Some(v) = s {
                last = *v;
            }
            last
        })
        .collect())
}

pub fn derive_knowledge_signals(ow: &SignalWindow) -> Result<SignalSet> {
    let hr = fill_gaps(&ow.hr)?;
    let sbp = fill_gaps(&ow.sbp)?;
    let dbp = fill_gaps(&ow.dbp)?;
    let map = fill_gaps(&ow.map)?;
    let pp: Vec<f64> = sbp.iter().zip(&dbp).map(|(s, d)| s - d).collect();
    let co: Vec<f64> = hr.iter().zip(&pp).map(|(h, p)| h * p).collect();
    Ok(SignalSet {
        hr,
        sbp,
        dbp,
        map,
        pp,
        co,
    })
}

/// The 111 feature names in emission order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for sig in SIGNAL_NAMES {
        for stat in STAT_NAMES {
            names.push(format!("{sig}_{stat}"));
        }
    }
    for (i, a) in SIGNAL_NAMES.iter().enumerate() {
        for b in &SIGNAL_NAMES[i + 1..] {
            names.push(format!("xcorr_{a}_{b}"));
        }
    }
    for sig in SIGNAL_NAMES {
        for level in 1..=LEVELS {
            names.push(format!("wave_{sig}_d{level}"));
        }
    }
    for sig in SIGNAL_NAMES {
        names.push(format!("{sig}_last"));
    }
    names
}

/// Feature values for one signal set, aligned with [`feature_names`].
pub fn featurize_signals(signals: &SignalSet, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let sigs = signals.signals();
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    for s in sigs {
        out.extend_from_slice(&stat_features(s)?);
    }
    for (i, a) in sigs.iter().enumerate() {
        for b in &sigs[i + 1..] {
            out.push(cross_correlation(a, b, cfg.max_lag));
        }
    }
    for s in sigs {
        out.extend_from_slice(&wavelet_energies(s, cfg.wavelet)?);
    }
    for s in sigs {
        out.push(s[s.len() - 1]);
    }
    debug_assert_eq!(out.len(), FEATURE_COUNT);
    if let Some(k) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            feature: feature_names().swap_remove(k),
            row: 0,
        });
    }
    Ok(out)
}

pub fn featurize(sub: &SubSequence, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    if !sub.valid {
        return Err(Error::Record(format!(
            "sub-sequence {}@{} is not valid",
            sub.patient_id, sub.decision_time
        )));
    }
    featurize_signals(&derive_knowledge_signals(&sub.ow)?, cfg)
}

/// Featurizes the valid sub-sequences, ordered by (patient, decision time),
/// with the target taken from `label`.
pub fn build_matrix<'a>(
    subs: impl IntoIterator<Item = &'a SubSequence>,
    label: impl Fn(&SubSequence) -> bool,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let mut valid: Vec<&SubSequence> = subs.into_iter().filter(|s| s.valid).collect();
    valid.sort_by(|a, b| {
        a.patient_id
            .cmp(&b.patient_id)
            .then(a.decision_time.cmp(&b.decision_time))
    });
    let mut values = Vec::with_capacity(valid.len() * FEATURE_COUNT);
    let mut y = Vec::with_capacity(valid.len());
    let mut provenance = Vec::with_capacity(valid.len());
    for sub in valid {
        values.extend(featurize(sub, cfg)?);
        y.push(label(sub));
        provenance.push(Provenance {
            patient_id: sub.patient_id.clone(),
            decision_time: sub.decision_time,
        });
    }
    FeatureMatrix::new(feature_names(), values, y, provenance)
}
