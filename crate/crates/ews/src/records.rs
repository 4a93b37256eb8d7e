//! Per-patient vitals files, cohort directories and the synthetic writer.
//!
//! A record file is UTF-8 CSV with the header `minute,hr,sbp,dbp,map`;
//! minutes increase by exactly one per row and an empty cell is a missing
//! sample. A cohort directory holds one `<patient_id>.csv` per patient and a
//! `patients.txt` listing the ids, one per line.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ews_core::ingest::{Sample, SyntheticCohort, VitalsRecord};
use rayon::prelude::*;

use crate::error::data;

pub const RECORD_HEADER: [&str; 5] = ["minute", "hr", "sbp", "dbp", "map"];
pub const MANIFEST: &str = "patients.txt";
pub const EPISODES: &str = "episodes.json";

fn cell(raw: &str, line: u64, column: &str) -> Result<Sample> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(data(format!("non-numeric {column} value `{raw}` at line {line}"))),
    }
}

/// Parses one record; errors name the offending line.
pub fn read_record<R: Read>(reader: R, patient_id: &str) -> Result<VitalsRecord> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| data(format!("unreadable header: {e}")))?,
        None => return Err(data("empty record")),
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != RECORD_HEADER {
        return Err(data(format!(
            "malformed header at line 1: expected `{}`",
            RECORD_HEADER.join(",")
        )));
    }
    let (mut hr, mut sbp, mut dbp, mut map) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut start = None;
    let mut expected = 0i64;
    for row in rows {
        let row = row.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, .. } => data(format!(
                "ragged row at line {}",
                pos.as_ref().map_or(0, |p| p.line())
            )),
            _ => data(format!("unreadable row: {e}")),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != RECORD_HEADER.len() {
            return Err(data(format!("ragged row at line {line}")));
        }
        let minute: i64 = row[0]
            .trim()
            .parse()
            .map_err(|_| data(format!("non-numeric minute `{}` at line {line}", &row[0])))?;
        match start {
            None => start = Some(minute),
            Some(_) if minute != expected => {
                return Err(data(format!("non-contiguous timestamps at line {line}")));
            }
            Some(_) => {}
        }
        expected = minute + 1;
        hr.push(cell(&row[1], line, "hr")?);
        sbp.push(cell(&row[2], line, "sbp")?);
        dbp.push(cell(&row[3], line, "dbp")?);
        map.push(cell(&row[4], line, "map")?);
    }
    let Some(start) = start else {
        return Err(data("empty record"));
    };
    Ok(VitalsRecord::new(patient_id, start, hr, sbp, dbp, map)?)
}

pub fn parse_record(path: &Path, patient_id: &str) -> Result<VitalsRecord> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_record(std::io::BufReader::new(file), patient_id).with_context(|| format!("in {}", path.display()))
}

fn fmt_sample(s: Sample) -> String {
    s.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_record<W: Write>(w: W, record: &VitalsRecord) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(RECORD_HEADER)?;
    for i in 0..record.len() {
        wtr.write_record([
            (record.start_minute() + i as i64).to_string(),
            fmt_sample(record.hr()[i]),
            fmt_sample(record.sbp()[i]),
            fmt_sample(record.dbp()[i]),
            fmt_sample(record.map()[i]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn record_path(dir: &Path, patient_id: &str) -> PathBuf {
    dir.join(format!("{patient_id}.csv"))
}

/// Patient ids from the manifest, in file order, blank lines skipped.
pub fn read_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let ids: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if ids.is_empty() {
        return Err(data(format!("{} lists no patients", path.display())));
    }
    let mut seen = std::collections::BTreeSet::new();
    for id in &ids {
        if !seen.insert(id) {
            return Err(data(format!("duplicate patient `{id}` in {}", path.display())));
        }
    }
    Ok(ids)
}

#[derive(Debug)]
pub struct LoadedCohort {
    /// Parsed records, in manifest order.
    pub records: Vec<VitalsRecord>,
    /// Patients skipped under `keep_going`, with the reason.
    pub failures: Vec<(String, String)>,
}

/// Parses every manifest entry. Without `keep_going` the first failing
/// patient (in manifest order) aborts the load.
pub fn load_cohort(dir: &Path, keep_going: bool) -> Result<LoadedCohort> {
    let ids = read_manifest(dir)?;
    let parsed: Vec<(String, Result<VitalsRecord>)> = ids
        .par_iter()
        .map(|id| (id.clone(), parse_record(&record_path(dir, id), id)))
        .collect();
    let mut records = Vec::with_capacity(parsed.len());
    let mut failures = Vec::new();
    for (id, r) in parsed {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) if keep_going => failures.push((id, format!("{e:#}"))),
            Err(e) => return Err(e.context(format!("patient `{id}`"))),
        }
    }
    if records.is_empty() {
        return Err(data("no patient record could be read"));
    }
    Ok(LoadedCohort { records, failures })
}

pub fn write_cohort(dir: &Path, records: &[VitalsRecord]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in records {
        let path = record_path(dir, r.patient_id());
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_record(std::io::BufWriter::new(file), r)?;
    }
    let manifest: String = records.iter().map(|r| format!("{}\n", r.patient_id())).collect();
    fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

/// Records, manifest and the ground-truth `episodes.json`.
pub fn write_synthetic(dir: &Path, cohort: &SyntheticCohort) -> Result<()> {
    write_cohort(dir, &cohort.records)?;
    let json = serde_json::to_string_pretty(&cohort.episodes)?;
    fs::write(dir.join(EPISODES), json + "\n")?;
    Ok(())
}
