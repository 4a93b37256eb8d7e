//! Event-level scoring of alarm streams.
//!
//! Per patient, an event is a maximal run of positive sub-sequences whose
//! decision times are exactly `stride` apart, and a false-alarm group is a
//! maximal run of alarms outside every event, again `stride` apart. An event
//! counts as captured when any of its members raises an alarm; only the first
//! such alarm matters. Each false-alarm group counts once.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Provenance;

/// One scored sub-sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlarmPoint {
    pub decision_time: i64,
    pub label: bool,
    pub alarm: bool,
}

/// Raw event counts; they add across patients.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    /// Events present (T).
    pub events: usize,
    /// Events with at least one alarm.
    pub captured: usize,
    /// Discounted false positives: false-alarm groups.
    pub dfp: usize,
    /// Sum over captured events of (last member time - first alarm time).
    pub anticipation_sum: i64,
    /// Alarms raised, inside or outside events.
    pub alarms: usize,
}

impl core::ops::AddAssign for EventCounts {
    fn add_assign(&mut self, o: Self) {
        self.events += o.events;
        self.captured += o.captured;
        self.dfp += o.dfp;
        self.anticipation_sum += o.anticipation_sum;
        self.alarms += o.alarms;
    }
}

/// Single pass over one patient's points, which must have strictly
/// increasing decision times.
pub fn patient_counts(points: &[AlarmPoint], stride: i64) -> Result<EventCounts> {
    let mut c = EventCounts::default();
    let mut prev: Option<AlarmPoint> = None;
    // Open event: (first alarm time, last member time).
    let mut event: Option<(Option<i64>, i64)> = None;
    let mut in_false_group = false;
    let close = |c: &mut EventCounts, ev: (Option<i64>, i64)| {
        if let (Some(first), last) = ev {
            c.captured += 1;
            c.anticipation_sum += last - first;
        }
    };
    for &p in points {
        let adjacent = match prev {
            Some(q) if p.decision_time <= q.decision_time => {
                return Err(Error::Record(alloc::format!(
                    "decision times not increasing at {}",
                    p.decision_time
                )))
            }
            Some(q) => p.decision_time - q.decision_time == stride,
            None => false,
        };
        if p.alarm {
            c.alarms += 1;
        }
        if p.label {
            in_false_group = false;
            match event.as_mut() {
                Some((first, last)) if adjacent => {
                    *last = p.decision_time;
                    if first.is_none() && p.alarm {
                        *first = Some(p.decision_time);
                    }
                }
                _ => {
                    if let Some(ev) = event.take() {
                        close(&mut c, ev);
                    }
                    c.events += 1;
                    event = Some((p.alarm.then_some(p.decision_time), p.decision_time));
                }
            }
        } else {
            if let Some(ev) = event.take() {
                close(&mut c, ev);
            }
            if p.alarm {
                if !(in_false_group && adjacent) {
                    c.dfp += 1;
                }
                in_false_group = true;
            } else {
                in_false_group = false;
            }
        }
        prev = Some(p);
    }
    if let Some(ev) = event {
        close(&mut c, ev);
    }
    Ok(c)
}

pub fn reduced_precision(captured: usize, dfp: usize) -> f64 {
    if captured + dfp == 0 {
        0.0
    } else {
        captured as f64 / (captured + dfp) as f64
    }
}

pub fn ef1(er: f64, rp: f64) -> f64 {
    if er + rp == 0.0 {
        0.0
    } else {
        2.0 * er * rp / (er + rp)
    }
}

/// Metrics of one test fold. `er`, `ef1` and `ave_at` are absent when the
/// fold has no events (or, for `ave_at`, none captured).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub counts: EventCounts,
    pub patients: usize,
    pub er: Option<f64>,
    pub rp: f64,
    pub ef1: Option<f64>,
    /// Minutes from the first correct alarm to the event's last member.
    pub ave_at: Option<f64>,
    /// False-alarm groups per test patient.
    pub ave_fa: f64,
}

impl FoldMetrics {
    pub fn from_counts(counts: EventCounts, patients: usize) -> Self {
        let er = (counts.events > 0).then(|| counts.captured as f64 / counts.events as f64);
        let rp = reduced_precision(counts.captured, counts.dfp);
        Self {
            counts,
            patients,
            er,
            rp,
            ef1: er.map(|e| ef1(e, rp)),
            ave_at: (counts.captured > 0).then(|| counts.anticipation_sum as f64 / counts.captured as f64),
            ave_fa: if patients == 0 {
                0.0
            } else {
                counts.dfp as f64 / patients as f64
            },
        }
    }
}

/// Scores probabilities for rows identified by `provenance`. Alarms fire
/// when the probability reaches `threshold`. `patients` is the number of
/// test patients, including any without a valid sub-sequence.
pub fn evaluate_alarms(
    provenance: &[Provenance],
    labels: &[bool],
    probabilities: &[f64],
    threshold: f64,
    stride: i64,
    patients: usize,
) -> Result<FoldMetrics> {
    if labels.len() != provenance.len() || probabilities.len() != provenance.len() {
        return Err(Error::LengthMismatch {
            expected: provenance.len(),
            got: labels.len().min(probabilities.len()),
        });
    }
    let mut by_patient: BTreeMap<&str, Vec<AlarmPoint>> = BTreeMap::new();
    for ((p, &label), &prob) in provenance.iter().zip(labels).zip(probabilities) {
        by_patient.entry(p.patient_id.as_str()).or_default().push(AlarmPoint {
            decision_time: p.decision_time,
            label,
            alarm: prob >= threshold,
        });
    }
    let mut total = EventCounts::default();
    for points in by_patient.values_mut() {
        points.sort_by_key(|p| p.decision_time);
        total += patient_counts(points, stride)?;
    }
    Ok(FoldMetrics::from_counts(total, patients.max(by_patient.len())))
}

/// Mean and sample standard deviation over the folds that define a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n: usize,
}

pub fn summarize(values: impl IntoIterator<Item = Option<f64>>) -> Summary {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    let n = v.len();
    if n == 0 {
        return Summary { mean: None, std: None, n };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        libm::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    Summary {
        mean: Some(mean),
        std: Some(std),
        n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub er: Summary,
    pub rp: Summary,
    pub ave_fa: Summary,
    pub ave_at: Summary,
    pub ef1: Summary,
    /// Folds left out of some mean, with the reason.
    pub notes: Vec<String>,
}

pub fn summarize_folds(folds: &[FoldMetrics]) -> MetricSummary {
    let notes = folds
        .iter()
        .enumerate()
        .filter(|(_, f)| f.er.is_none())
        .map(|(i, _)| alloc::format!("fold {i}: no test events; ER, EF1 and aveAT excluded"))
        .collect();
    MetricSummary {
        er: summarize(folds.iter().map(|f| f.er)),
        rp: summarize(folds.iter().map(|f| Some(f.rp))),
        ave_fa: summarize(folds.iter().map(|f| Some(f.ave_fa))),
        ave_at: summarize(folds.iter().map(|f| f.ave_at)),
        ef1: summarize(folds.iter().map(|f| f.ef1)),
        notes,
    }
}
