//! Run configuration: one TOML file plus `--set section.key=value`
//! overrides.
//!
//! ```toml
//! seed = 7            # required; every random stage derives from it
//! task = "ahe"        # or "te"
//!
//! [paths]             # relative paths resolve against the config file
//! cohort = "cohort"
//! output = "out"
//!
//! [window]            # minutes
//! ow_len = 60
//! ww_len = 60
//! tw_len = 30
//! stride = 30
//!
//! [features]
//! max_lag = 10
//! wavelet = "meyer"   # or "daubechies4"
//!
//! [selection]
//! mode = "mig_threshold"  # none | mig_threshold | greedy_jmi | split_importance
//! threshold = 0.01
//! k = 20
//! weights = { kind = "inverse_subset_size" }  # or { kind = "fixed", alpha = 0.5, beta = 0.5 }
//! mi = { bins = 16 }
//!
//! [model]
//! kind = "gbdt"       # or "nb"
//! [model.gbdt]
//! num_trees = 300
//! learning_rate = 0.1
//! max_leaves = 31
//! min_data_in_leaf = 20
//! leaf_regularizer = 1.0
//! bins = 255
//! goss_a = 0.2
//! goss_b = 0.1
//! goss_warmup_trees = 1
//! efb_enabled = true
//!
//! [eval]
//! folds = 5
//! undersample_times = 10
//! undersample_ratio = 1.0
//! threshold = 0.5
//! shuffle_training_labels = false
//!
//! [output]
//! save_models = false
//!
//! [tuner]             # optional; used by `run-cv --tune`
//! n_trials = 10
//! inner_folds = 3
//! [tuner.space]
//! learning_rate = { kind = "log_uniform", low = 0.02, high = 0.3 }
//! max_leaves = { kind = "integer", low = 8, high = 63 }
//! goss_a = { kind = "choice", values = [0.1, 0.2, 0.3] }
//! ```
//!
//! Override values are read as TOML (`3`, `0.5`, `true`, `"x"`); anything
//! that does not parse is taken as a bare string. Unknown keys are errors.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ews_core::features::FeatureConfig;
use ews_core::ingest::{Task, WindowConfig};
use ews_core::pipeline::{EvalConfig, ModelConfig, PipelineConfig, SelectionConfig};
use ews_core::tuning::ParamSpace;
use serde::{Deserialize, Serialize};

use crate::error::usage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub cohort: PathBuf,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            cohort: "cohort".into(),
            output: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Write each fold's ensemble to `models/fold<k>.json`.
    pub save_models: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerConfig {
    pub n_trials: usize,
    pub inner_folds: usize,
    pub space: ParamSpace,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            n_trials: 10,
            inner_folds: 3,
            space: ParamSpace::new(),
        }
    }
}

fn default_task() -> Task {
    Task::Ahe
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_task")]
    pub task: Task,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuner: Option<TunerConfig>,
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            task: default_task(),
            paths: Paths::default(),
            window: WindowConfig::default(),
            features: FeatureConfig::default(),
            selection: SelectionConfig::default(),
            model: ModelConfig::default(),
            eval: EvalConfig::default(),
            output: OutputConfig::default(),
            tuner: None,
        }
    }

    /// Reads `path`, applies `overrides` and resolves relative paths
    /// against the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::from_toml(&text, overrides).with_context(|| format!("in config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.paths.cohort, &mut cfg.paths.output] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| usage(format!("config is not valid TOML: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        if !table.contains_key("seed") {
            return Err(usage("config must set `seed`"));
        }
        let cfg: Self = table
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| usage(format!("invalid config: {e}")))?;
        let known = toml::Table::try_from(&cfg).map_err(|e| usage(format!("config cannot be serialized: {e}")))?;
        check_known(&table, &known, "")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| usage(format!("config cannot be serialized: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.eval.validate()?;
        self.model.gbdt.validate()?;
        self.selection.mi.validate()?;
        if !(0.0..=1.0).contains(&self.selection.threshold) {
            return Err(usage("selection.threshold must lie in [0, 1]"));
        }
        if let Some(t) = &self.tuner {
            if t.n_trials == 0 {
                return Err(usage("tuner.n_trials must be at least 1"));
            }
            if t.inner_folds < 2 {
                return Err(usage("tuner.inner_folds must be at least 2"));
            }
        }
        Ok(())
    }

    /// The library configuration with the top-level seed applied.
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            selection: self.selection.clone(),
            model: self.model.clone(),
            eval: EvalConfig {
                seed: self.seed,
                ..self.eval.clone()
            },
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Sets a dotted key, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| usage(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(usage(format!("override key `{key}` is malformed")));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| usage(format!("override `{key}`: `{p}` is not a section")))?;
    }
    t.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Every key the user wrote must survive a deserialize/serialize cycle;
/// otherwise it was misspelled or misplaced. Free-form maps are skipped.
fn check_known(user: &toml::Table, known: &toml::Table, prefix: &str) -> Result<()> {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        if path == "tuner.space" {
            continue;
        }
        match (v, known.get(k)) {
            (_, None) => return Err(usage(format!("unknown config key `{path}`"))),
            (toml::Value::Table(u), Some(toml::Value::Table(kn))) => {
                // Tagged enums keep only their variant's fields.
                if u.contains_key("kind") && path != "model" {
                    continue;
                }
                check_known(u, kn, &path)?;
            }
            _ => {}
        }
    }
    Ok(())
}
