use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a feature row came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub patient_id: String,
    pub decision_time: i64,
}

/// Row-major feature table with a binary target and per-row provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    values: Vec<f64>,
    y: Vec<bool>,
    provenance: Vec<Provenance>,
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        values: Vec<f64>,
        y: Vec<bool>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let n_rows = y.len();
        if provenance.len() != n_rows {
            return Err(Error::LengthMismatch {
                expected: n_rows,
                got: provenance.len(),
            });
        }
        if values.len() != n_rows * names.len() {
            return Err(Error::LengthMismatch {
                expected: n_rows * names.len(),
                got: values.len(),
            });
        }
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("duplicate feature names"));
        }
        Ok(Self {
            names,
            values,
            y,
            provenance,
        })
    }

    /// Builds a matrix from rows; every row must have `names.len()` entries.
    pub fn from_rows(
        names: Vec<String>,
        rows: &[Vec<f64>],
        y: Vec<bool>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * names.len());
        for row in rows {
            if row.len() != names.len() {
                return Err(Error::LengthMismatch {
                    expected: names.len(),
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(names, values, y, provenance)
    }

    /// Unnamed matrix (`f0`, `f1`, ...) with synthetic provenance, for tests
    /// and tools that only care about the numbers.
    pub fn anonymous(n_features: usize, values: Vec<f64>, y: Vec<bool>) -> Result<Self> {
        let names = (0..n_features).map(|j| alloc::format!("f{j}")).collect();
        let provenance = (0..y.len())
            .map(|i| Provenance {
                patient_id: String::from("anon"),
                decision_time: i as i64,
            })
            .collect();
        Self::new(names, values, y, provenance)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.names.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.names.len() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let p = self.names.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            values,
            y: rows.iter().map(|&i| self.y[i]).collect(),
            provenance: rows.iter().map(|&i| self.provenance[i].clone()).collect(),
        }
    }

    /// Keeps the listed feature columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        Self {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            values,
            y: self.y.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Reorders/selects columns to match `names`; errors list what is
    /// missing and what is surplus.
    pub fn align_to(&self, names: &[String]) -> Result<Self> {
        let missing: Vec<String> = names
            .iter()
            .filter(|n| self.feature_index(n).is_none())
            .cloned()
            .collect();
        let extra: Vec<String> = self
            .names
            .iter()
            .filter(|n| !names.contains(n))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::SchemaMismatch { missing, extra });
        }
        let cols: Vec<usize> = names
            .iter()
            .map(|n| self.feature_index(n).unwrap_or_default())
            .collect();
        Ok(self.select_columns(&cols))
    }

    /// Columns named in `names`, in that order; other columns are dropped.
    /// Errors only when a requested name is absent.
    pub fn project(&self, names: &[String]) -> Result<Self> {
        let mut cols = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for n in names {
            match self.feature_index(n) {
                Some(j) => cols.push(j),
                None => missing.push(n.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::SchemaMismatch {
                missing,
                extra: Vec::new(),
            });
        }
        Ok(self.select_columns(&cols))
    }

    pub fn with_target(&self, y: Vec<bool>) -> Result<Self> {
        if y.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                expected: self.n_rows(),
                got: y.len(),
            });
        }
        Ok(Self {
            y,
            ..self.clone()
        })
    }

    /// Sorted, de-duplicated patient ids.
    pub fn patients(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.provenance.iter().map(|p| p.patient_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn check_finite(&self) -> Result<()> {
        let p = self.names.len();
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFinite {
                feature: self.names[k % p].clone(),
                row: k / p,
            }),
            None => Ok(()),
        }
    }
}
