use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::record::{Sample, VitalsRecord, VALID_RANGE};
use crate::error::{Error, Result};

/// Window lengths and stride, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub ow_len: usize,
    pub ww_len: usize,
    pub tw_len: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            ow_len: 60,
            ww_len: 60,
            tw_len: 30,
            stride: 30,
        }
    }
}

impl WindowConfig {
    pub fn span(&self) -> usize {
        self.ow_len + self.ww_len + self.tw_len
    }

    pub fn validate(&self) -> Result<()> {
        if self.ow_len == 0 || self.ww_len == 0 || self.tw_len == 0 || self.stride == 0 {
            return Err(Error::config("window lengths and stride must be positive"));
        }
        if self.tw_len < 30 {
            return Err(Error::config("tw_len must be at least 30 minutes"));
        }
        if self.stride > self.span() {
            return Err(Error::config("stride must not exceed ow_len + ww_len + tw_len"));
        }
        Ok(())
    }
}

/// The four raw signals over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalWindow {
    pub hr: Vec<Sample>,
    pub sbp: Vec<Sample>,
    pub dbp: Vec<Sample>,
    pub map: Vec<Sample>,
}

impl SignalWindow {
    fn slice(record: &VitalsRecord, from: usize, len: usize) -> Self {
        let r = from..from + len;
        Self {
            hr: record.hr()[r.clone()].to_vec(),
            sbp: record.sbp()[r.clone()].to_vec(),
            dbp: record.dbp()[r.clone()].to_vec(),
            map: record.map()[r].to_vec(),
        }
    }

    pub fn signals(&self) -> [&[Sample]; 4] {
        [&self.hr, &self.sbp, &self.dbp, &self.map]
    }
}

/// One (OW, WW, TW) triple. `y1` flags an AHE in the target window, `y2` a
/// TE; both are `false` whenever `valid` is `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSequence {
    pub patient_id: String,
    pub start: i64,
    pub decision_time: i64,
    pub ow: SignalWindow,
    pub tw: SignalWindow,
    pub valid: bool,
    pub y1: bool,
    pub y2: bool,
}

/// Which episode the classifier is predicting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ahe,
    Te,
}

impl Task {
    pub fn label(&self, sub: &SubSequence) -> bool {
        match self {
            Task::Ahe => sub.y1,
            Task::Te => sub.y2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Ahe => "ahe",
            Task::Te => "te",
        }
    }
}

impl core::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ahe" => Ok(Task::Ahe),
            "te" => Ok(Task::Te),
            other => Err(Error::config(alloc::format!("unknown task `{other}`"))),
        }
    }
}

fn in_range(v: Sample) -> bool {
    matches!(v, Some(x) if (VALID_RANGE.0..=VALID_RANGE.1).contains(&x))
}

/// Every HR and MAP value of the target window present and within [10, 200].
pub fn validate_target_window(sub: &SubSequence) -> bool {
    sub.tw.hr.iter().chain(sub.tw.map.iter()).all(|&v| in_range(v))
}

/// Each of the four signals has at least 95% of its observation-window
/// values present and within [10, 200].
pub fn validate_observation_window(sub: &SubSequence) -> bool {
    sub.ow.signals().iter().all(|s| {
        let ok = s.iter().filter(|&&v| in_range(v)).count();
        ok * 20 >= s.len() * 19
    })
}

/// At least 90% of target-window MAP values at or below 60 mmHg.
pub fn label_ahe(sub: &SubSequence) -> bool {
    fraction_at_least_90(&sub.tw.map, |x| x <= 60.0)
}

/// At least 90% of target-window HR values strictly above 100 bpm.
pub fn label_te(sub: &SubSequence) -> bool {
    fraction_at_least_90(&sub.tw.hr, |x| x > 100.0)
}

fn fraction_at_least_90(series: &[Sample], pred: impl Fn(f64) -> bool) -> bool {
    let hits = series.iter().filter(|v| matches!(v, Some(x) if pred(*x))).count();
    !series.is_empty() && hits * 10 >= series.len() * 9
}

/// Cuts a record into sub-sequences every `stride` minutes, screens them
/// and labels the valid ones. Records shorter than one span yield nothing.
pub fn segment(record: &VitalsRecord, cfg: &WindowConfig) -> Vec<SubSequence> {
    let span = cfg.span();
    if record.len() < span || cfg.stride == 0 {
        return Vec::new();
    }
    let count = (record.len() - span) / cfg.stride + 1;
    (0..count)
        .map(|m| {
            let offset = m * cfg.stride;
            let start = record.start_minute() + offset as i64;
            let mut sub = SubSequence {
                patient_id: String::from(record.patient_id()),
                start,
                decision_time: start + cfg.ow_len as i64,
                ow: SignalWindow::slice(record, offset, cfg.ow_len),
                tw: SignalWindow::slice(record, offset + cfg.ow_len + cfg.ww_len, cfg.tw_len),
                valid: false,
                y1: false,
                y2: false,
            };
            sub.valid = validate_target_window(&sub) && validate_observation_window(&sub);
            if sub.valid {
                sub.y1 = label_ahe(&sub);
                sub.y2 = label_te(&sub);
            }
            sub
        })
        .collect()
}
