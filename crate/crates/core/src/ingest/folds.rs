use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Patient-level partition for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<String>>,
}

impl FoldPlan {
    /// Index of the fold holding `patient`.
    pub fn fold_of(&self, patient: &str) -> Option<usize> {
        self.folds
            .iter()
            .position(|f| f.iter().any(|p| p == patient))
    }
}

/// Shuffles the (de-duplicated, sorted) ids with the seed and deals them
/// round-robin into `k` folds.
pub fn make_folds(patient_ids: &[String], k: usize, seed: u64) -> Result<FoldPlan> {
    let mut ids: Vec<String> = patient_ids.to_vec();
    ids.sort();
    ids.dedup();
    if k < 2 || k > ids.len() {
        return Err(Error::config(alloc::format!(
            "k = {k} folds needs 2 <= k <= {} patients",
            ids.len()
        )));
    }
    let mut rng = seed::rng(seed::derive(seed, "folds"));
    ids.shuffle(&mut rng);
    let mut folds = alloc::vec![Vec::new(); k];
    for (i, id) in ids.into_iter().enumerate() {
        folds[i % k].push(id);
    }
    Ok(FoldPlan { k, seed, folds })
}
