//! Command-line entry point.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ews_core::ingest::{generate_synthetic_cohort, SynthConfig, WindowConfig};
use ews_core::metrics::{evaluate_alarms, FoldMetrics};
use ews_core::pipeline::{Ensemble, SelectionConfig, SelectionReport};
use ews_core::FeatureMatrix;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{data, exit_code, usage};
use crate::harness::{self, Compiled};
use crate::records::{load_cohort, write_synthetic};
use crate::report::{render_table, render_timing, round3, RunReport, TimingReport};
use crate::table::{load_features, save_features};

#[derive(Debug, Parser)]
#[command(name = "ews", version, about = "Early-warning pipeline for hypotensive and tachycardia episodes")]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "EWS_THREADS")]
    pub threads: Option<usize>,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Override a config value, e.g. `--set model.gbdt.num_trees=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic cohort with implanted episodes.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        patients: usize,
        #[arg(long, default_value_t = 3000)]
        minutes: usize,
        #[arg(long, default_value_t = 0.6)]
        episode_rate: f64,
        #[arg(long, default_value_t = 0.001)]
        artifact_rate: f64,
    },
    /// Segment the cohort into labeled sub-sequences.
    Compile {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Skip unreadable patient files instead of failing.
        #[arg(long)]
        keep_going: bool,
    },
    /// Write the feature file for the configured task.
    Featurize {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        keep_going: bool,
    },
    /// Run feature selection on all rows and write the selection report.
    Select {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Use this feature file instead of featurizing the cohort.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Train one undersampled ensemble on all rows.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        features: Option<PathBuf>,
        /// Model file (default: <output>/model.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a trained model's alarms on a feature file.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Patient-grouped cross-validation with reports.
    RunCv {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        features: Option<PathBuf>,
        /// Random-search GBDT parameters first (needs a [tuner] section).
        #[arg(long)]
        tune: bool,
        #[arg(long)]
        keep_going: bool,
    },
    /// Render one or more report.json files as a table.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

pub const MODEL_FILE_VERSION: u32 = 1;

/// What `train` writes and `evaluate` reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub task: ews_core::ingest::Task,
    pub window: WindowConfig,
    pub selection: SelectionReport,
    pub ensemble: Ensemble,
}

#[derive(Debug, Serialize)]
struct SelectionFile<'a> {
    config: &'a SelectionConfig,
    report: &'a SelectionReport,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn compile(cfg: &RunConfig, keep_going: bool) -> Result<Compiled> {
    let cohort = load_cohort(&cfg.paths.cohort, keep_going)?;
    for (id, why) in &cohort.failures {
        warn!("skipped patient {id}: {why}");
        eprintln!("skipped patient {id}: {why}");
    }
    let mut compiled = harness::compile_records(&cohort.records, &cfg.window)?;
    compiled.stats.failed_patients = cohort.failures.len();
    Ok(compiled)
}

/// Feature matrix and the cohort's patient list.
fn features(cfg: &RunConfig, file: Option<&Path>, keep_going: bool) -> Result<(FeatureMatrix, Vec<String>)> {
    match file {
        Some(path) => {
            let x = load_features(path)?;
            let patients = x.patients();
            Ok((x, patients))
        }
        None => {
            let c = compile(cfg, keep_going)?;
            let x = harness::featurize_all(&c.subsequences, cfg.task, &cfg.features)?;
            Ok((x, c.patients))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            out,
            seed,
            patients,
            minutes,
            episode_rate,
            artifact_rate,
        } => {
            let cfg = SynthConfig {
                seed,
                n_patients: patients,
                minutes_per_patient: minutes,
                episode_rate,
                artifact_rate,
                ..SynthConfig::default()
            };
            let cohort = generate_synthetic_cohort(&cfg)?;
            write_synthetic(&out, &cohort)?;
            println!(
                "wrote {} patients and {} episodes to {}",
                cohort.records.len(),
                cohort.episodes.len(),
                out.display()
            );
        }
        Command::Compile { cfg, keep_going } => {
            let cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let c = compile(&cfg, keep_going)?;
            let out = &cfg.paths.output;
            fs::create_dir_all(out)?;
            let mut buf = Vec::new();
            harness::write_index(&mut buf, &c.subsequences)?;
            fs::write(out.join("subsequences.csv"), buf)?;
            write_json(&out.join("compile_stats.json"), &c.stats)?;
            let s = &c.stats;
            println!(
                "patients {} (failed {}), sub-sequences {}, kept {}, dropped {} (target window {}, observation window {}), positive AHE {}, positive TE {}",
                s.patients,
                s.failed_patients,
                s.subsequences,
                s.kept,
                s.dropped_target + s.dropped_observation,
                s.dropped_target,
                s.dropped_observation,
                s.positives_ahe,
                s.positives_te
            );
        }
        Command::Featurize { cfg, keep_going } => {
            let cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let (x, _) = features(&cfg, None, keep_going)?;
            fs::create_dir_all(&cfg.paths.output)?;
            let path = cfg.paths.output.join("features.csv");
            save_features(&path, &x)?;
            println!("wrote {} rows x {} features to {}", x.n_rows(), x.n_features(), path.display());
        }
        Command::Select { cfg, features: file } => {
            let cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let (x, _) = features(&cfg, file.as_deref(), false)?;
            let p = cfg.pipeline();
            let report = ews_core::pipeline::select_features(&x, &p.selection, &p.model, ews_core::seed::derive(cfg.seed, "train"))?;
            let path = cfg.paths.output.join("selection.json");
            write_json(&path, &SelectionFile { config: &p.selection, report: &report })?;
            println!("selected {} of {} features", report.selected.len(), x.n_features());
            if let Some(w) = &report.warning {
                println!("warning: {w}");
            }
        }
        Command::Train { cfg, features: file, out } => {
            let cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let (x, _) = features(&cfg, file.as_deref(), false)?;
            let (selection, ensemble) = harness::train_full(&x, &cfg)?;
            let path = out.unwrap_or_else(|| cfg.paths.output.join("model.json"));
            let file = ModelFile {
                version: MODEL_FILE_VERSION,
                task: cfg.task,
                window: cfg.window,
                selection,
                ensemble,
            };
            write_text(&path, &(serde_json::to_string(&file)? + "\n"))?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate { cfg, model, features: file } => {
            let cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let m: ModelFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", model.display()))?;
            if m.version != MODEL_FILE_VERSION {
                return Err(data(format!("unsupported model file version {}", m.version)));
            }
            let (x, patients) = features(&cfg, file.as_deref(), false)?;
            let probs = m.ensemble.predict_proba(&x)?;
            let metrics: FoldMetrics = evaluate_alarms(
                x.provenance(),
                x.y(),
                &probs,
                cfg.eval.threshold,
                m.window.stride as i64,
                patients.len(),
            )?;
            write_json(&cfg.paths.output.join("evaluation.json"), &metrics)?;
            println!("{}", serde_json::to_string_pretty(&metrics)?);
        }
        Command::RunCv {
            cfg,
            features: file,
            tune,
            keep_going,
        } => {
            let mut cfg = RunConfig::load(&cfg.config, &cfg.set)?;
            let started = Instant::now();
            let (x, patients) = features(&cfg, file.as_deref(), keep_going)?;
            info!("{} rows, {} patients", x.n_rows(), patients.len());
            let out = cfg.paths.output.clone();
            if tune {
                let (best, outcome) = harness::tune(&x, &patients, &cfg)?;
                write_json(&out.join("best_params.json"), &best)?;
                write_json(&out.join("tuning_trials.json"), &outcome)?;
                cfg.model.gbdt = best;
            }
            let plan = harness::outer_plan(&patients, &cfg)?;
            let run = harness::cross_validate(&x, &plan, &cfg.pipeline(), cfg.window.stride as i64)?;
            let report: RunReport = harness::build_report(&x, patients.len(), &cfg, &run);
            write_json(&out.join("report.json"), &report)?;
            let table = render_table(&[&report]);
            write_text(&out.join("report.txt"), &table)?;
            let timing = TimingReport {
                threads: rayon::current_num_threads(),
                folds: run.timing.clone(),
                total_seconds: round3(started.elapsed().as_secs_f64()),
            };
            write_json(&out.join("timing.json"), &timing)?;
            write_text(&out.join("timing.txt"), &render_timing(&timing))?;
            if cfg.output.save_models {
                for (k, e) in run.ensembles.iter().enumerate() {
                    write_text(&out.join("models").join(format!("fold{k}.json")), &(serde_json::to_string(e)? + "\n"))?;
                }
            }
            print!("{table}");
            for f in &report.folds {
                for w in &f.warnings {
                    println!("fold {}: {w}", f.fold);
                }
            }
        }
        Command::Report { reports } => {
            let mut loaded = Vec::new();
            for p in &reports {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let r: RunReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                loaded.push(r);
            }
            print!("{}", render_table(&loaded.iter().collect::<Vec<_>>()));
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return exit_code(&usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return crate::error::EXIT_INTERNAL;
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
