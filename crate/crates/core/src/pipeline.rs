//! Patient-grouped cross-validation: per fold, select features on the
//! training patients, train one model per undersampled resample, average the
//! members' probabilities on the untouched test patients and score events.
//!
//! The steps are exposed separately so a caller can run folds and members
//! concurrently; every step is deterministic given its inputs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{train_gbdt, GbdtModel, GbdtParams};
use crate::ingest::{undersample, FoldPlan};
use crate::matrix::FeatureMatrix;
use crate::metrics::{evaluate_alarms, FoldMetrics};
use crate::nb::{train_nb, NbModel};
use crate::seed;
use crate::selection::{greedy_jmi_select, rank_by_mig, MiEstimatorConfig, RedundancyWeights, GreedyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    None,
    #[default]
    MigThreshold,
    GreedyJmi,
    SplitImportance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub mode: SelectionMode,
    /// Minimum normalized importance for the threshold mode.
    pub threshold: f64,
    /// Subset size for the greedy mode.
    pub k: usize,
    pub weights: RedundancyWeights,
    pub mi: MiEstimatorConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            mode: SelectionMode::MigThreshold,
            threshold: 0.01,
            k: 20,
            weights: RedundancyWeights::InverseSubsetSize,
            mi: MiEstimatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Gbdt,
    Nb,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub gbdt: GbdtParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub folds: usize,
    pub undersample_times: usize,
    /// Negatives kept per positive in each resample.
    pub undersample_ratio: f64,
    /// Alarm when the ensemble probability is at least this.
    pub threshold: f64,
    /// Supplied by the caller's top-level seed rather than read from files.
    #[serde(skip)]
    pub seed: u64,
    /// Null-model control: permute the training labels of every fold.
    pub shuffle_training_labels: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            undersample_times: 10,
            undersample_ratio: 1.0,
            threshold: 0.5,
            seed: 0,
            shuffle_training_labels: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::config("at least 2 folds are required"));
        }
        if self.undersample_times == 0 {
            return Err(Error::config("undersample_times must be at least 1"));
        }
        if !(self.undersample_ratio > 0.0 && self.undersample_ratio.is_finite()) {
            return Err(Error::config("undersample_ratio must be positive"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config("alarm threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub selection: SelectionConfig,
    pub model: ModelConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Gbdt(GbdtModel),
    Nb(NbModel),
}

impl TrainedModel {
    pub fn train(x: &FeatureMatrix, cfg: &ModelConfig, seed_value: u64) -> Result<Self> {
        match cfg.kind {
            ModelKind::Gbdt => {
                let params = GbdtParams {
                    seed: seed_value,
                    ..cfg.gbdt.clone()
                };
                train_gbdt(x, &params).map(Self::Gbdt)
            }
            ModelKind::Nb => train_nb(x).map(Self::Nb),
        }
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Self::Gbdt(m) => m.predict_proba(x),
            Self::Nb(m) => m.predict_proba(x),
        }
    }
}

/// Members trained on undersampled resamples; predicts their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub feature_names: Vec<String>,
    pub members: Vec<TrainedModel>,
}

impl Ensemble {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let x = x.project(&self.feature_names)?;
        let mut sum = alloc::vec![0.0; x.n_rows()];
        for m in &self.members {
            for (s, p) in sum.iter_mut().zip(m.predict_proba(&x)?) {
                *s += p;
            }
        }
        let k = self.members.len().max(1) as f64;
        Ok(sum.into_iter().map(|s| s / k).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mode: SelectionMode,
    pub feature_names: Vec<String>,
    pub selected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_mi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub importance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub greedy_trace: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_importance: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Chooses columns of `x` by its labels. An empty choice falls back to all
/// columns and says so in the report's warning.
pub fn select_features(x: &FeatureMatrix, cfg: &SelectionConfig, model: &ModelConfig, seed_value: u64) -> Result<SelectionReport> {
    let mut report = SelectionReport {
        mode: cfg.mode,
        feature_names: x.names().to_vec(),
        ..SelectionReport::default()
    };
    let picked: Vec<usize> = match cfg.mode {
        SelectionMode::None => (0..x.n_features()).collect(),
        SelectionMode::MigThreshold => {
            let r = rank_by_mig(x, &cfg.mi, cfg.threshold)?;
            report.warning = r.warning;
            report.raw_mi = Some(r.raw);
            report.importance = Some(r.importance);
            r.selected
        }
        SelectionMode::GreedyJmi => {
            let s = greedy_jmi_select(x, &cfg.mi, &GreedyConfig { k: cfg.k, weights: cfg.weights })?;
            report.greedy_trace = Some(s.trace);
            s.indices
        }
        SelectionMode::SplitImportance => {
            let us = undersample(x.y(), 1, 1.0, seed::derive(seed_value, "importance-undersample"))?;
            let sub = x.select_rows(&us.sets[0]);
            let params = GbdtParams {
                seed: seed::derive(seed_value, "importance-model"),
                ..model.gbdt.clone()
            };
            let counts = train_gbdt(&sub, &params)?.split_importance();
            let chosen = (0..counts.len()).filter(|&j| counts[j] > 0).collect();
            report.split_importance = Some(counts);
            chosen
        }
    };
    let picked = if picked.is_empty() {
        let note = "selection kept no feature; using all features";
        report.warning = Some(match report.warning.take() {
            Some(w) => alloc::format!("{w}; {note}"),
            None => note.into(),
        });
        (0..x.n_features()).collect()
    } else {
        picked
    };
    report.selected = picked.iter().map(|&j| x.names()[j].clone()).collect();
    Ok(report)
}

/// A fold after selection and resampling, ready for member training.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub fold: usize,
    pub seed: u64,
    pub test_patients: Vec<String>,
    /// Training rows restricted to the selected columns.
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub selection: SelectionReport,
    /// Row indices into `train`, one set per ensemble member.
    pub resamples: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

pub fn fold_seed(cfg: &EvalConfig, fold: usize) -> u64 {
    seed::derive_indexed(cfg.seed, "fold", fold as u64)
}

pub fn prepare_fold(x: &FeatureMatrix, plan: &FoldPlan, fold: usize, cfg: &PipelineConfig) -> Result<PreparedFold> {
    let test_ids: BTreeSet<&str> = plan
        .folds
        .get(fold)
        .ok_or_else(|| Error::config(alloc::format!("fold {fold} out of range")))?
        .iter()
        .map(String::as_str)
        .collect();
    let (test_rows, train_rows): (Vec<usize>, Vec<usize>) =
        (0..x.n_rows()).partition(|&i| test_ids.contains(x.provenance()[i].patient_id.as_str()));
    let fseed = fold_seed(&cfg.eval, fold);
    let mut train = x.select_rows(&train_rows);
    let mut warnings = Vec::new();
    if cfg.eval.shuffle_training_labels {
        let mut y = train.y().to_vec();
        y.shuffle(&mut seed::rng(seed::derive(fseed, "shuffle")));
        train = train.with_target(y)?;
    }
    let selection = select_features(&train, &cfg.selection, &cfg.model, fseed)?;
    if let Some(w) = &selection.warning {
        warnings.push(w.clone());
    }
    let train = train.project(&selection.selected)?;
    let test = x.select_rows(&test_rows).project(&selection.selected)?;
    let us = undersample(
        train.y(),
        cfg.eval.undersample_times,
        cfg.eval.undersample_ratio,
        seed::derive(fseed, "undersample"),
    )?;
    if us.warning {
        warnings.push("too few negatives to undersample; training on all rows".into());
    }
    Ok(PreparedFold {
        fold,
        seed: fseed,
        test_patients: test_ids.iter().map(|s| String::from(*s)).collect(),
        train,
        test,
        selection,
        resamples: us.sets,
        warnings,
    })
}

pub fn train_member(prepared: &PreparedFold, member: usize, cfg: &PipelineConfig) -> Result<TrainedModel> {
    let rows = &prepared.resamples[member];
    let sub = prepared.train.select_rows(rows);
    TrainedModel::train(&sub, &cfg.model, seed::derive_indexed(prepared.seed, "member", member as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_patients: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_positives: usize,
    pub selection: SelectionReport,
    pub metrics: FoldMetrics,
    pub warnings: Vec<String>,
}

/// Scores the ensemble on the fold's test rows.
pub fn finish_fold(prepared: PreparedFold, ensemble: &Ensemble, cfg: &PipelineConfig, stride: i64) -> Result<FoldOutcome> {
    let probs = ensemble.predict_proba(&prepared.test)?;
    let metrics = evaluate_alarms(
        prepared.test.provenance(),
        prepared.test.y(),
        &probs,
        cfg.eval.threshold,
        stride,
        prepared.test_patients.len(),
    )?;
    let mut warnings = prepared.warnings;
    if metrics.er.is_none() {
        warnings.push("no events among test patients".into());
    }
    Ok(FoldOutcome {
        fold: prepared.fold,
        test_patients: prepared.test_patients,
        train_rows: prepared.train.n_rows(),
        test_rows: prepared.test.n_rows(),
        test_positives: prepared.test.y().iter().filter(|&&v| v).count(),
        selection: prepared.selection,
        metrics,
        warnings,
    })
}

/// One fold start to finish, members trained in order.
pub fn run_fold(x: &FeatureMatrix, plan: &FoldPlan, fold: usize, cfg: &PipelineConfig, stride: i64) -> Result<(FoldOutcome, Ensemble)> {
    let prepared = prepare_fold(x, plan, fold, cfg)?;
    let members = (0..prepared.resamples.len())
        .map(|r| train_member(&prepared, r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = Ensemble {
        feature_names: prepared.selection.selected.clone(),
        members,
    };
    let outcome = finish_fold(prepared, &ensemble, cfg, stride)?;
    Ok((outcome, ensemble))
}
