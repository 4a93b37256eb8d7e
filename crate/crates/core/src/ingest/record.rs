use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One minute's reading; `None` is the missing marker.
pub type Sample = Option<f64>;

/// Inclusive plausibility range used by both window validators.
pub const VALID_RANGE: (f64, f64) = (10.0, 200.0);

/// One patient's minute-by-minute HR/SBP/DBP/MAP series. Sample `i` is at
/// minute `start_minute + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalsRecord {
    patient_id: String,
    start_minute: i64,
    hr: Vec<Sample>,
    sbp: Vec<Sample>,
    dbp: Vec<Sample>,
    map: Vec<Sample>,
}

impl VitalsRecord {
    pub fn new(
        patient_id: impl Into<String>,
        start_minute: i64,
        hr: Vec<Sample>,
        sbp: Vec<Sample>,
        dbp: Vec<Sample>,
        map: Vec<Sample>,
    ) -> Result<Self> {
        let len = hr.len();
        if len == 0 {
            return Err(Error::Record(String::from("empty record")));
        }
        for s in [&sbp, &dbp, &map] {
            if s.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    got: s.len(),
                });
            }
        }
        if [&hr, &sbp, &dbp, &map]
            .iter()
            .any(|s| s.iter().flatten().any(|v| !v.is_finite()))
        {
            return Err(Error::Record(String::from(
                "non-finite sample; use the missing marker instead",
            )));
        }
        Ok(Self {
            patient_id: patient_id.into(),
            start_minute,
            hr,
            sbp,
            dbp,
            map,
        })
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    pub fn start_minute(&self) -> i64 {
        self.start_minute
    }

    pub fn len(&self) -> usize {
        self.hr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hr.is_empty()
    }

    pub fn hr(&self) -> &[Sample] {
        &self.hr
    }

    pub fn sbp(&self) -> &[Sample] {
        &self.sbp
    }

    pub fn dbp(&self) -> &[Sample] {
        &self.dbp
    }

    pub fn map(&self) -> &[Sample] {
        &self.map
    }
}
