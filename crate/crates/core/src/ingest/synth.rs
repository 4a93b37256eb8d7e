//! Synthetic cohorts with implanted episodes.
//!
//! Each patient gets stable baselines plus AR(1) noise. Episodes are placed
//! on candidate onsets aligned with target-window starts, spaced two full
//! sub-sequence spans apart. Before every episode the observation window of
//! the sub-sequence whose target window begins at the onset carries a linear
//! drift (pressures falling before an AHE, heart rate rising before a TE),
//! which snaps back at the start of the warning window.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::record::{Sample, VitalsRecord};
use super::window::WindowConfig;
use crate::error::{Error, Result};
use crate::seed::{self, StageRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeKind {
    Ahe,
    Te,
}

/// Ground truth for one implanted episode; `offset` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeInterval {
    pub patient: String,
    pub kind: EpisodeKind,
    pub onset: i64,
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_patients: usize,
    pub minutes_per_patient: usize,
    /// Probability that a candidate onset hosts an episode.
    pub episode_rate: f64,
    pub window: WindowConfig,
    /// MAP drop (mmHg) reached at the end of the pre-AHE drift.
    pub map_drift: f64,
    /// HR rise (bpm) reached at the end of the pre-TE drift.
    pub hr_drift: f64,
    /// Per-sample probability of a missing cell; half as many out-of-range spikes.
    pub artifact_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_patients: 40,
            minutes_per_patient: 3000,
            episode_rate: 0.6,
            window: WindowConfig::default(),
            map_drift: 25.0,
            hr_drift: 30.0,
            artifact_rate: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCohort {
    pub records: Vec<VitalsRecord>,
    pub episodes: Vec<EpisodeInterval>,
}

struct Ar1 {
    phi: f64,
    innovation_sd: f64,
    state: f64,
}

impl Ar1 {
    fn new(phi: f64, sd: f64) -> Self {
        Self {
            phi,
            innovation_sd: sd * libm::sqrt(1.0 - phi * phi),
            state: 0.0,
        }
    }

    fn step(&mut self, rng: &mut StageRng) -> f64 {
        self.state = self.phi * self.state + self.innovation_sd * standard_normal(rng);
        self.state
    }
}

fn standard_normal(rng: &mut StageRng) -> f64 {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

fn round1(v: f64) -> f64 {
    libm::round(v * 10.0) / 10.0
}

pub fn generate_synthetic_cohort(cfg: &SynthConfig) -> Result<SyntheticCohort> {
    if cfg.n_patients == 0 || cfg.minutes_per_patient == 0 {
        return Err(Error::config("synthetic cohort needs patients and minutes"));
    }
    if !(cfg.episode_rate >= 0.0) || !(cfg.artifact_rate >= 0.0) {
        return Err(Error::config("rates must be non-negative"));
    }
    cfg.window.validate()?;
    let mut records = Vec::with_capacity(cfg.n_patients);
    let mut episodes = Vec::new();
    for p in 0..cfg.n_patients {
        let (record, mut eps) = generate_patient(cfg, p)?;
        records.push(record);
        episodes.append(&mut eps);
    }
    Ok(SyntheticCohort { records, episodes })
}

fn generate_patient(cfg: &SynthConfig, index: usize) -> Result<(VitalsRecord, Vec<EpisodeInterval>)> {
    let w = &cfg.window;
    let n = cfg.minutes_per_patient;
    let patient = format!("p{index:03}");
    let mut rng = seed::rng(seed::derive_indexed(cfg.seed, "synth", index as u64));

    let hr_base = 68.0 + 12.0 * rng.gen::<f64>();
    let sbp_base = 115.0 + 10.0 * rng.gen::<f64>();
    let dbp_base = 65.0 + 7.0 * rng.gen::<f64>();

    let mut d_hr = alloc::vec![0.0; n];
    let mut d_press = alloc::vec![0.0; n];
    let mut kind_at: Vec<Option<EpisodeKind>> = alloc::vec![None; n];

    let stride = w.stride;
    let lead = w.ow_len + w.ww_len;
    let first = lead + w.ow_len.div_ceil(stride) * stride;
    let spacing = (2 * w.span()).div_ceil(stride) * stride;
    let max_dur = w.tw_len + w.tw_len / 2;

    let mut episodes = Vec::new();
    let mut onset = first;
    while onset + max_dur <= n {
        let occupied = rng.gen::<f64>() < cfg.episode_rate;
        let kind = if rng.gen::<bool>() {
            EpisodeKind::Ahe
        } else {
            EpisodeKind::Te
        };
        let duration = rng.gen_range(w.tw_len..=max_dur);
        if occupied {
            let drift_start = onset - lead;
            for k in 0..w.ow_len {
                let frac = (k + 1) as f64 / w.ow_len as f64;
                match kind {
                    EpisodeKind::Ahe => d_press[drift_start + k] = -cfg.map_drift * frac,
                    EpisodeKind::Te => d_hr[drift_start + k] = cfg.hr_drift * frac,
                }
            }
            for slot in kind_at.iter_mut().skip(onset).take(duration) {
                *slot = Some(kind);
            }
            episodes.push(EpisodeInterval {
                patient: patient.clone(),
                kind,
                onset: onset as i64,
                offset: (onset + duration) as i64,
            });
        }
        onset += spacing;
    }

    let mut hr_noise = Ar1::new(0.9, 2.0);
    let mut sbp_noise = Ar1::new(0.9, 1.5);
    let mut dbp_noise = Ar1::new(0.9, 1.2);
    let (mut hr, mut sbp, mut dbp, mut map) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for t in 0..n {
        let (e_hr, e_sbp, e_dbp) = (
            hr_noise.step(&mut rng),
            sbp_noise.step(&mut rng),
            dbp_noise.step(&mut rng),
        );
        let mut h = hr_base + d_hr[t] + e_hr;
        let mut s = sbp_base + d_press[t] + e_sbp;
        let mut d = dbp_base + d_press[t] + e_dbp;
        match kind_at[t] {
            Some(EpisodeKind::Ahe) => {
                s = 72.0 + e_sbp;
                d = 40.0 + e_dbp;
            }
            Some(EpisodeKind::Te) => h = f64::max(125.0 + e_hr, 105.0),
            None => {}
        }
        let mut m = d + (s - d) / 3.0;
        if kind_at[t] == Some(EpisodeKind::Ahe) {
            m = f64::min(m, 58.0);
        }
        h = round1(h);
        s = round1(s);
        d = round1(d);
        m = round1(m);
        hr.push(artifact(&mut rng, h, cfg.artifact_rate));
        sbp.push(artifact(&mut rng, s, cfg.artifact_rate));
        dbp.push(artifact(&mut rng, d, cfg.artifact_rate));
        map.push(artifact(&mut rng, m, cfg.artifact_rate));
    }
    let record = VitalsRecord::new(patient, 0, hr, sbp, dbp, map)?;
    Ok((record, episodes))
}

fn artifact(rng: &mut StageRng, v: f64, rate: f64) -> Sample {
    let u: f64 = rng.gen();
    if u < rate {
        None
    } else if u < 1.5 * rate {
        Some(250.0)
    } else {
        Some(v)
    }
}
