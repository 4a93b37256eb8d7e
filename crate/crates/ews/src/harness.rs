//! Stage drivers shared by the subcommands: compile a cohort into
//! sub-sequences, featurize, cross-validate and tune.

use std::time::Instant;

use anyhow::Result;
use ews_core::features::{featurize, feature_names, FeatureConfig};
use ews_core::gbdt::GbdtParams;
use ews_core::ingest::{
    make_folds, segment, validate_observation_window, validate_target_window, FoldPlan, SubSequence, Task,
    VitalsRecord, WindowConfig,
};
use ews_core::metrics::summarize_folds;
use ews_core::pipeline::{
    finish_fold, prepare_fold, select_features, train_member, Ensemble, FoldOutcome, PipelineConfig,
    SelectionReport, TrainedModel,
};
use ews_core::tuning::{apply_gbdt_point, random_search, SearchOutcome};
use ews_core::{seed, FeatureMatrix, Provenance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::{round3, FoldTiming, RunReport};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompileStats {
    pub patients: usize,
    pub failed_patients: usize,
    pub subsequences: usize,
    pub kept: usize,
    /// Dropped because a target-window HR/MAP value was missing or out of range.
    pub dropped_target: usize,
    /// Dropped only because an observation-window signal fell below 95% in range.
    pub dropped_observation: usize,
    pub positives_ahe: usize,
    pub positives_te: usize,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    /// Patient ids of every parsed record, in manifest order.
    pub patients: Vec<String>,
    /// Per patient, in start order.
    pub subsequences: Vec<SubSequence>,
    pub stats: CompileStats,
}

pub fn compile_records(records: &[VitalsRecord], window: &WindowConfig) -> Result<Compiled> {
    window.validate()?;
    let per_patient: Vec<Vec<SubSequence>> = records.par_iter().map(|r| segment(r, window)).collect();
    let mut stats = CompileStats {
        patients: records.len(),
        ..CompileStats::default()
    };
    for s in per_patient.iter().flatten() {
        stats.subsequences += 1;
        if s.valid {
            stats.kept += 1;
            stats.positives_ahe += usize::from(s.y1);
            stats.positives_te += usize::from(s.y2);
        } else if !validate_target_window(s) {
            stats.dropped_target += 1;
        } else if !validate_observation_window(s) {
            stats.dropped_observation += 1;
        }
    }
    Ok(Compiled {
        patients: records.iter().map(|r| r.patient_id().to_string()).collect(),
        subsequences: per_patient.into_iter().flatten().collect(),
        stats,
    })
}

/// `patient_id,start,decision_time,valid,y1,y2` per sub-sequence.
pub fn write_index<W: std::io::Write>(w: W, subs: &[SubSequence]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["patient_id", "start", "decision_time", "valid", "y1", "y2"])?;
    let b = |v: bool| if v { "1" } else { "0" };
    for s in subs {
        wtr.write_record([
            s.patient_id.as_str(),
            &s.start.to_string(),
            &s.decision_time.to_string(),
            b(s.valid),
            b(s.y1),
            b(s.y2),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Feature matrix of the valid sub-sequences, rows ordered by patient and
/// decision time, target taken from `task`.
pub fn featurize_all(subs: &[SubSequence], task: Task, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    let mut valid: Vec<&SubSequence> = subs.iter().filter(|s| s.valid).collect();
    valid.sort_by(|a, b| a.patient_id.cmp(&b.patient_id).then(a.decision_time.cmp(&b.decision_time)));
    let rows: Vec<Vec<f64>> = valid
        .par_iter()
        .map(|s| featurize(s, cfg))
        .collect::<ews_core::Result<_>>()?;
    let values = rows.concat();
    let y = valid.iter().map(|s| task.label(s)).collect();
    let prov = valid
        .iter()
        .map(|s| Provenance {
            patient_id: s.patient_id.clone(),
            decision_time: s.decision_time,
        })
        .collect();
    Ok(FeatureMatrix::new(feature_names(), values, y, prov)?)
}

/// Everything one cross-validation produces.
#[derive(Debug, Clone)]
pub struct CvRun {
    pub folds: Vec<FoldOutcome>,
    pub ensembles: Vec<Ensemble>,
    pub timing: Vec<FoldTiming>,
}

/// Runs every fold. Folds, then every (fold, member) training job, run on
/// the current rayon pool; results are gathered in fold and member order so
/// the outcome does not depend on the number of workers.
pub fn cross_validate(x: &FeatureMatrix, plan: &FoldPlan, cfg: &PipelineConfig, stride: i64) -> Result<CvRun> {
    let prepared: Vec<_> = (0..plan.k)
        .into_par_iter()
        .map(|k| {
            let t = Instant::now();
            prepare_fold(x, plan, k, cfg).map(|p| (p, t.elapsed().as_secs_f64()))
        })
        .collect::<ews_core::Result<_>>()?;
    let jobs: Vec<(usize, usize)> = prepared
        .iter()
        .enumerate()
        .flat_map(|(k, (p, _))| (0..p.resamples.len()).map(move |r| (k, r)))
        .collect();
    let trained: Vec<(TrainedModel, f64)> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let t = Instant::now();
            train_member(&prepared[k].0, r, cfg).map(|m| (m, t.elapsed().as_secs_f64()))
        })
        .collect::<ews_core::Result<_>>()?;
    let mut members: Vec<Vec<TrainedModel>> = vec![Vec::new(); plan.k];
    let mut train_seconds = vec![0.0; plan.k];
    for (&(k, _), (m, secs)) in jobs.iter().zip(trained) {
        members[k].push(m);
        train_seconds[k] += secs;
    }
    let ensembles: Vec<Ensemble> = prepared
        .iter()
        .zip(members)
        .map(|((p, _), members)| Ensemble {
            feature_names: p.selection.selected.clone(),
            members,
        })
        .collect();
    let finished: Vec<(FoldOutcome, f64, f64)> = prepared
        .into_par_iter()
        .zip(ensembles.par_iter())
        .map(|((p, sel_secs), ens)| {
            let t = Instant::now();
            finish_fold(p, ens, cfg, stride).map(|o| (o, sel_secs, t.elapsed().as_secs_f64()))
        })
        .collect::<ews_core::Result<_>>()?;
    let mut folds = Vec::with_capacity(plan.k);
    let mut timing = Vec::with_capacity(plan.k);
    for (k, (o, sel, pred)) in finished.into_iter().enumerate() {
        timing.push(FoldTiming {
            fold: k,
            selection_seconds: round3(sel),
            train_seconds: round3(train_seconds[k]),
            predict_seconds: round3(pred),
        });
        folds.push(o);
    }
    Ok(CvRun { folds, ensembles, timing })
}

pub fn fold_metrics(folds: &[FoldOutcome]) -> Vec<ews_core::metrics::FoldMetrics> {
    folds.iter().map(|f| f.metrics.clone()).collect()
}

pub fn outer_plan(patients: &[String], cfg: &RunConfig) -> Result<FoldPlan> {
    Ok(make_folds(patients, cfg.eval.folds, cfg.seed)?)
}

pub fn build_report(x: &FeatureMatrix, patients: usize, cfg: &RunConfig, run: &CvRun) -> RunReport {
    RunReport {
        task: cfg.task,
        model: cfg.model.kind,
        selection: cfg.selection.mode,
        seed: cfg.seed,
        window: cfg.window,
        guaranteed_gap_minutes: cfg.window.ww_len,
        shuffled_training_labels: cfg.eval.shuffle_training_labels,
        patients,
        rows: x.n_rows(),
        positives: x.y().iter().filter(|&&v| v).count(),
        gbdt_params: (cfg.model.kind == ews_core::pipeline::ModelKind::Gbdt).then(|| cfg.model.gbdt.clone()),
        folds: run.folds.clone(),
        summary: summarize_folds(&fold_metrics(&run.folds)),
    }
}

/// Random search scored by mean inner-CV EF1 over the whole cohort.
pub fn tune(x: &FeatureMatrix, patients: &[String], cfg: &RunConfig) -> Result<(GbdtParams, SearchOutcome)> {
    let tuner = cfg
        .tuner
        .clone()
        .ok_or_else(|| crate::error::usage("`--tune` needs a [tuner] section"))?;
    let plan = make_folds(patients, tuner.inner_folds, seed::derive(cfg.seed, "tuner-folds"))?;
    let base = cfg.pipeline();
    let stride = cfg.window.stride as i64;
    let mut failure: Option<anyhow::Error> = None;
    let outcome = random_search(&tuner.space, tuner.n_trials, cfg.seed, |point| {
        let params = apply_gbdt_point(&base.model.gbdt, point)?;
        let mut trial = base.clone();
        trial.model.gbdt = params;
        match cross_validate(x, &plan, &trial, stride) {
            Ok(run) => Ok(summarize_folds(&fold_metrics(&run.folds)).ef1.mean),
            Err(e) => {
                failure.get_or_insert(e);
                Err(ews_core::Error::Config("inner cross-validation failed".into()))
            }
        }
    });
    let outcome = match (outcome, failure) {
        (_, Some(e)) => return Err(e),
        (o, None) => o?,
    };
    let best = apply_gbdt_point(&base.model.gbdt, &outcome.best_trial().point)?;
    Ok((best, outcome))
}

/// Selection on every row, then one ensemble over undersampled resamples.
pub fn train_full(x: &FeatureMatrix, cfg: &RunConfig) -> Result<(SelectionReport, Ensemble)> {
    let pipeline = cfg.pipeline();
    let s = seed::derive(cfg.seed, "train");
    let selection = select_features(x, &pipeline.selection, &pipeline.model, s)?;
    let x = x.project(&selection.selected)?;
    let us = ews_core::ingest::undersample(
        x.y(),
        pipeline.eval.undersample_times,
        pipeline.eval.undersample_ratio,
        seed::derive(s, "undersample"),
    )?;
    let members = us
        .sets
        .par_iter()
        .enumerate()
        .map(|(r, rows)| {
            TrainedModel::train(&x.select_rows(rows), &pipeline.model, seed::derive_indexed(s, "member", r as u64))
        })
        .collect::<ews_core::Result<Vec<_>>>()?;
    Ok((
        selection.clone(),
        Ensemble {
            feature_names: selection.selected,
            members,
        },
    ))
}
