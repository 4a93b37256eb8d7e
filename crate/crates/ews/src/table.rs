//! Feature files: CSV with the feature names, then `y`, `patient_id` and
//! `decision_time`. Rows are ordered by patient, then decision time; floats
//! use the shortest text that reads back to the same value.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use ews_core::{FeatureMatrix, Provenance};

use crate::error::data;

const TAIL: [&str; 3] = ["y", "patient_id", "decision_time"];

pub fn write_features<W: Write>(w: W, x: &FeatureMatrix) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(x.names().iter().map(String::as_str).chain(TAIL))?;
    let mut row: Vec<String> = Vec::with_capacity(x.n_features() + 3);
    for i in 0..x.n_rows() {
        row.clear();
        row.extend(x.row(i).iter().map(|v| v.to_string()));
        let p = &x.provenance()[i];
        row.push(if x.y()[i] { "1" } else { "0" }.into());
        row.push(p.patient_id.clone());
        row.push(p.decision_time.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(r: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let k = header.len();
    if k < 4 || header[k - 3..] != TAIL {
        return Err(data("feature file must end with columns y,patient_id,decision_time"));
    }
    let names = header[..k - 3].to_vec();
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut prov = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        for j in 0..k - 3 {
            let v: f64 = rec[j]
                .parse()
                .map_err(|_| data(format!("non-numeric `{}` in column {} at line {line}", &rec[j], names[j])))?;
            values.push(v);
        }
        y.push(match &rec[k - 3] {
            "1" => true,
            "0" => false,
            other => return Err(data(format!("label `{other}` is not 0 or 1 at line {line}"))),
        });
        prov.push(Provenance {
            patient_id: rec[k - 2].to_string(),
            decision_time: rec[k - 1]
                .parse()
                .map_err(|_| data(format!("non-integer decision_time at line {line}")))?,
        });
    }
    Ok(FeatureMatrix::new(names, values, y, prov)?)
}

pub fn save_features(path: &Path, x: &FeatureMatrix) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_features(std::io::BufWriter::new(file), x)
}

pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_features(std::io::BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let names = vec!["a".to_string(), "b".to_string()];
        let values = vec![0.1 + 0.2, -1e-300, 1.0 / 3.0, 12345.678];
        let prov = vec![
            Provenance { patient_id: "p1".into(), decision_time: 60 },
            Provenance { patient_id: "p1".into(), decision_time: 90 },
        ];
        let x = FeatureMatrix::new(names, values, vec![true, false], prov).unwrap();
        let mut buf = Vec::new();
        write_features(&mut buf, &x).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b,y,patient_id,decision_time\n"));
        assert_eq!(read_features(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn rejects_bad_labels() {
        let text = "a,y,patient_id,decision_time\n1.0,2,p,0\n";
        assert!(read_features(text.as_bytes()).unwrap_err().to_string().contains("line 2"));
    }
}
