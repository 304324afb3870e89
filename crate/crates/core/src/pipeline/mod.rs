//! The end-to-end workflow as in-memory steps: detect lifecycles in a
//! stream, build the historic tables, featurize, train, predict.
//!
//! Historic, training and test data are separate streams. Each step is a
//! pure function of its inputs, so two runs over the same inputs agree bit
//! for bit.

mod config;
mod summary;

use std::collections::BTreeMap;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::Prediction;
use crate::features::{
    assemble, base_features, snapshot_grams, FeatureContext, FeatureError, FeatureMatrix, FeatureRow, HistoricEntry,
    PrototypeIndex, SaxConfig, Task, TopGramTables,
};
use crate::ingest::{IngestError, Lexicons, TweetReader};
use crate::lifecycle::{
    label_instance, outcomes_from_events, CycleOutcome, EndOfStream, Engine, EngineConfig, EngineOutput,
    HashtagSnapshot, InstanceLabels, LifecycleError, LifecycleEvent,
};
use crate::models::{
    log_target, predict_label, predict_time, train_classifier, train_regressor, ModelError, ModelKind, TrainedModel,
};

pub use config::{Dataset, RunConfig};
pub use summary::{class_balance, compare_truth, summarize, LifecycleSummary, StageBalance, TruthCheck};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub output: EngineOutput,
    /// Lines that failed to parse and were skipped.
    pub skipped: u64,
}

/// Runs the lifecycle engine over a JSON-lines stream. Malformed lines are
/// skipped and counted; out-of-order tweets are an error.
pub fn detect<R: BufRead>(
    reader: R,
    lexicons: &Lexicons,
    config: EngineConfig,
    end: EndOfStream,
) -> Result<Detection, PipelineError> {
    let mut engine = Engine::new(config, lexicons.sentiment.clone())?;
    let mut skipped = 0;
    for item in TweetReader::new(reader, &lexicons.emoticons) {
        match item {
            Ok(t) => engine.ingest(&t)?,
            Err(e) => {
                log::warn!("skipping record: {e}");
                skipped += 1;
            }
        }
    }
    Ok(Detection {
        output: engine.finish(end)?,
        skipped,
    })
}

/// A snapshot with its cycle outcome and, when resolved, its labels.
#[derive(Debug, Clone)]
pub struct LabeledSnapshot<'a> {
    pub snapshot: &'a HashtagSnapshot,
    pub outcome: Option<&'a CycleOutcome>,
    pub labels: Option<InstanceLabels>,
}

impl LabeledSnapshot<'_> {
    /// Whether the snapshot is an instance of `task`. Without a resolved
    /// outcome only what is visible at `t_p` is used: Tasks 1 and 2 take
    /// hashtags that have not burst yet, Task 3 those that have.
    pub fn eligible(&self, task: Task) -> bool {
        let t_p = self.snapshot.prediction_minute;
        match (self.outcome.filter(|_| self.labels.is_some()), task) {
            (Some(o), Task::Burst) => o.task1_eligible(t_p),
            (Some(o), Task::Tbb) => o.task2_eligible(t_p),
            (Some(o), Task::Tra) => o.task3_eligible(t_p),
            (None, Task::Burst | Task::Tbb) => self.snapshot.burst_onset_minute.is_none_or(|b| b > t_p),
            (None, Task::Tra) => self.snapshot.burst_onset_minute.is_some_and(|b| b <= t_p),
        }
    }
}

pub fn label_snapshots<'a>(
    snapshots: &'a [HashtagSnapshot],
    outcomes: &'a BTreeMap<(String, u32), CycleOutcome>,
) -> Vec<LabeledSnapshot<'a>> {
    snapshots
        .iter()
        .map(|s| {
            let outcome = outcomes.get(&(s.key.clone(), s.cycle));
            let labels = outcome.and_then(|o| label_instance(o, s.prediction_minute).ok());
            LabeledSnapshot {
                snapshot: s,
                outcome,
                labels,
            }
        })
        .collect()
}

/// Everything featurization learns from the historic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricTables {
    pub sax: SaxConfig,
    pub top_grams: TopGramTables,
    pub index: PrototypeIndex,
}

impl HistoricTables {
    pub fn context(&self) -> FeatureContext<'_> {
        FeatureContext {
            sax: self.sax,
            top_grams: &self.top_grams,
            index: &self.index,
        }
    }
}

/// Builds the prototype index and top-gram tables from resolved historic
/// snapshots. Every stage gets an entry, possibly empty.
pub fn build_tables(
    snapshots: &[HashtagSnapshot],
    events: &[LifecycleEvent],
    stages: &[u32],
    sax: SaxConfig,
) -> Result<HistoricTables, PipelineError> {
    sax.validate()?;
    let outcomes = outcomes_from_events(events);
    let labeled: Vec<_> = label_snapshots(snapshots, &outcomes)
        .into_iter()
        .filter(|l| l.labels.is_some())
        .collect();
    let entries: Vec<(u32, HistoricEntry)> = labeled
        .par_iter()
        .map(|l| {
            let labels = l.labels.expect("filtered to labeled");
            let s = l.snapshot;
            Ok((
                s.stage_minutes,
                HistoricEntry {
                    key: s.key.clone(),
                    cycle: s.cycle,
                    base: base_features(s)?.to_vec(),
                    burst_candidate: l.eligible(Task::Burst),
                    burst: labels.burst,
                    tbb: labels.tbb.filter(|_| l.eligible(Task::Tbb)),
                    tra: labels.tra.filter(|_| l.eligible(Task::Tra)),
                },
            ))
        })
        .collect::<Result<_, FeatureError>>()?;
    let mut by_stage: BTreeMap<u32, Vec<HistoricEntry>> = stages.iter().map(|&s| (s, Vec::new())).collect();
    for (stage, e) in entries {
        by_stage.entry(stage).or_default().push(e);
    }
    let grams: Vec<(u32, _)> = labeled
        .iter()
        .filter(|l| l.labels.is_some_and(|x| x.burst))
        .map(|l| (l.snapshot.stage_minutes, snapshot_grams(l.snapshot, &sax)))
        .collect();
    let mut top_grams = TopGramTables::build(grams.iter().map(|(s, g)| (*s, g)));
    for &s in stages {
        top_grams.stages.entry(s).or_default();
    }
    Ok(HistoricTables {
        sax,
        top_grams,
        index: PrototypeIndex::build(by_stage),
    })
}

/// One matrix per task, rows ordered by (stage, key, cycle).
pub fn featurize(
    snapshots: &[HashtagSnapshot],
    events: &[LifecycleEvent],
    tables: &HistoricTables,
) -> Result<Vec<FeatureMatrix>, PipelineError> {
    let outcomes = outcomes_from_events(events);
    let labeled = label_snapshots(snapshots, &outcomes);
    let ctx = tables.context();
    [Task::Burst, Task::Tbb, Task::Tra]
        .into_iter()
        .map(|task| {
            let mut rows: Vec<FeatureRow> = labeled
                .par_iter()
                .filter(|l| l.eligible(task))
                .map(|l| {
                    let vector = assemble(l.snapshot, task, &ctx)?;
                    let labels = l.labels;
                    Ok(FeatureRow {
                        vector,
                        burst: labels.map(|x| x.burst).filter(|_| task == Task::Burst),
                        tbb: labels.and_then(|x| x.tbb).filter(|_| task == Task::Tbb),
                        tra: labels.and_then(|x| x.tra).filter(|_| task == Task::Tra),
                    })
                })
                .collect::<Result<_, FeatureError>>()?;
            rows.sort_by(|a, b| {
                (a.vector.stage_minutes, &a.vector.key, a.vector.cycle).cmp(&(
                    b.vector.stage_minutes,
                    &b.vector.key,
                    b.vector.cycle,
                ))
            });
            Ok(FeatureMatrix { task, rows })
        })
        .collect()
}

fn matrix(matrices: &[FeatureMatrix], task: Task) -> Option<&FeatureMatrix> {
    matrices.iter().find(|m| m.task == task)
}

/// Trains, per stage, one classifier per β and every configured regressor
/// for Tasks 2 and 3. Stages whose rows cannot support a model are skipped
/// with a warning. Models are ordered by (task, stage, kind, β).
pub fn train(matrices: &[FeatureMatrix], cfg: &RunConfig) -> Result<Vec<TrainedModel>, PipelineError> {
    cfg.validate()?;
    let mut jobs: Vec<(Task, u32, ModelKind, Option<f64>)> = Vec::new();
    for &stage in &cfg.stages {
        for &beta in &cfg.betas {
            jobs.push((Task::Burst, stage, ModelKind::WeightedLinearSvm, Some(beta)));
        }
        for task in [Task::Tbb, Task::Tra] {
            for &kind in &cfg.regressors {
                jobs.push((task, stage, kind, None));
            }
        }
    }
    let results: Vec<Result<Option<TrainedModel>, PipelineError>> = jobs
        .par_iter()
        .map(|&(task, stage, kind, beta)| {
            let Some(m) = matrix(matrices, task) else {
                return Ok(None);
            };
            let rows: Vec<&FeatureRow> = m
                .stage_rows(stage)
                .filter(|r| r.burst.is_some() || r.tbb.or(r.tra).is_some())
                .collect();
            let x: Vec<Vec<f64>> = rows.iter().map(|r| r.vector.values.clone()).collect();
            let fitted = match task {
                Task::Burst => {
                    let y: Vec<bool> = rows.iter().map(|r| r.burst == Some(true)).collect();
                    let mut c = cfg.classifier;
                    c.beta = beta.expect("classifier jobs carry a beta");
                    c.split_seed = cfg.seed ^ stage as u64;
                    train_classifier(&x, &y, stage, &c)
                }
                Task::Tbb | Task::Tra => {
                    let y: Vec<f64> = rows
                        .iter()
                        .map(|r| r.tbb.or(r.tra).expect("labeled rows") as f64)
                        .collect();
                    train_regressor(&x, &y, kind, task, stage, &cfg.regressor)
                }
            };
            match fitted {
                Ok(m) => Ok(Some(m)),
                Err(e @ (ModelError::DegenerateData(_) | ModelError::UndefinedF(_) | ModelError::EmptyGrid)) => {
                    log::warn!("no {} model for {} at {stage} min: {e}", kind.name(), task.name());
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let mut models = Vec::new();
    for r in results {
        if let Some(m) = r? {
            models.push(m);
        }
    }
    Ok(models)
}

/// Applies every model to the rows of its task and stage. Truth is filled in
/// when the row carries labels.
pub fn predict(models: &[TrainedModel], matrices: &[FeatureMatrix]) -> Result<Vec<Prediction>, PipelineError> {
    let per_model: Vec<Result<Vec<Prediction>, ModelError>> = models
        .par_iter()
        .map(|model| {
            let Some(m) = matrix(matrices, model.task) else {
                return Ok(Vec::new());
            };
            let label = model.label();
            m.stage_rows(model.stage_minutes)
                .map(|r| {
                    let (predicted, score, truth) = match model.task {
                        Task::Burst => {
                            let (p, s) = predict_label(model, &r.vector.values)?;
                            (p as u8 as f64, s, r.burst.map(|b| b as u8 as f64))
                        }
                        Task::Tbb => {
                            let p = predict_time(model, &r.vector.values)?;
                            (p, p, r.tbb.map(|m| log_target(m as f64)))
                        }
                        Task::Tra => {
                            let p = predict_time(model, &r.vector.values)?;
                            (p, p, r.tra.map(|m| log_target(m as f64)))
                        }
                    };
                    Ok(Prediction {
                        stage: model.stage_minutes,
                        task: model.task,
                        model: label.clone(),
                        key: r.vector.key.clone(),
                        cycle: r.vector.cycle,
                        predicted,
                        score,
                        truth,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for p in per_model {
        out.extend(p?);
    }
    Ok(out)
}
