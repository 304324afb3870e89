//! The staged evaluation protocol: per stage, class balance of the test
//! set, Task 1 precision/recall/F against two baselines, and Task 2/3 RMSE
//! against the training mean.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{f_beta, rmse, Confusion};
use super::EvaluationError;
use crate::features::{FeatureMatrix, Task};
use crate::lifecycle::CheckpointStats;
use crate::models::{ModelKind, TrainedModel};

/// One model output for one instance. Task 1 values are 0/1; Task 2/3
/// values are log minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub stage: u32,
    pub task: Task,
    pub model: String,
    pub key: String,
    pub cycle: u32,
    pub predicted: f64,
    /// Classifier margin; equals `predicted` for regressors.
    pub score: f64,
    pub truth: Option<f64>,
}

/// The predictions of one model at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedRun<'a> {
    pub stage: u32,
    pub task: Task,
    pub model: &'a str,
    pub predictions: Vec<&'a Prediction>,
}

/// Groups predictions by (stage, task, model), keeping only labeled ones.
pub fn staged_runs(predictions: &[Prediction]) -> Vec<StagedRun<'_>> {
    let mut groups: BTreeMap<(u32, Task, &str), Vec<&Prediction>> = BTreeMap::new();
    for p in predictions.iter().filter(|p| p.truth.is_some()) {
        groups.entry((p.stage, p.task, p.model.as_str())).or_default().push(p);
    }
    groups
        .into_iter()
        .map(|((stage, task, model), predictions)| StagedRun {
            stage,
            task,
            model,
            predictions,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub stage: u32,
    pub task: Task,
    pub model: String,
    pub metric: String,
    /// `None` when the metric is undefined.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub stages: Vec<u32>,
    pub rows: Vec<ReportRow>,
}

pub const DATA: &str = "data";
pub const ALL_POSITIVE: &str = "all-positive";
pub const PRIOR_RANDOM: &str = "prior-random";
pub const GLOBAL_MEAN: &str = "global-mean";

fn f_name(beta: f64) -> String {
    format!("f{beta}")
}

fn row(stage: u32, task: Task, model: &str, metric: &str, value: Option<f64>) -> ReportRow {
    ReportRow {
        stage,
        task,
        model: model.to_string(),
        metric: metric.to_string(),
        value,
    }
}

fn stage_rows(stage: u32, test: &[FeatureMatrix], models: &[TrainedModel], predictions: &[StagedRun<'_>]) -> Vec<ReportRow> {
    let mut out = Vec::new();
    let classifiers: Vec<&TrainedModel> = models
        .iter()
        .filter(|m| m.task == Task::Burst && m.stage_minutes == stage)
        .collect();
    let mut betas: Vec<f64> = classifiers.iter().filter_map(|m| m.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    if !betas.contains(&1.0) {
        betas.insert(0, 1.0);
    }

    // Class balance of the labeled Task 1 instances.
    let (mut pos, mut neg) = (0usize, 0usize);
    if let Some(m) = test.iter().find(|m| m.task == Task::Burst) {
        for r in m.stage_rows(stage) {
            match r.burst {
                Some(true) => pos += 1,
                Some(false) => neg += 1,
                None => {}
            }
        }
    }
    let n = pos + neg;
    let p = (n > 0).then(|| pos as f64 / n as f64);
    out.push(row(stage, Task::Burst, DATA, "eligible", Some(n as f64)));
    out.push(row(stage, Task::Burst, DATA, "positives", Some(pos as f64)));
    out.push(row(stage, Task::Burst, DATA, "negatives", Some(neg as f64)));
    out.push(row(stage, Task::Burst, DATA, "positive_share", p));
    for task in [Task::Tbb, Task::Tra] {
        let count = test
            .iter()
            .find(|m| m.task == task)
            .map_or(0, |m| m.stage_rows(stage).filter(|r| r.tbb.or(r.tra).is_some()).count());
        out.push(row(stage, task, DATA, "eligible", Some(count as f64)));
    }

    // All-positive: precision p, recall 1 (undefined without positives).
    let ap_recall = (pos > 0).then_some(1.0);
    out.push(row(stage, Task::Burst, ALL_POSITIVE, "precision", p));
    out.push(row(stage, Task::Burst, ALL_POSITIVE, "recall", ap_recall));
    for &b in &betas {
        let f = p.zip(ap_recall).and_then(|(p, r)| f_beta(p, r, b));
        out.push(row(stage, Task::Burst, ALL_POSITIVE, &f_name(b), f));
    }
    // Prior-random: predicts positive with the training positive rate q,
    // so its expected precision is p and its expected recall is q.
    if let Some(q) = classifiers.first().map(|m| m.summary.positive_rate) {
        let prec = p.filter(|_| q > 0.0);
        let rec = (pos > 0).then_some(q);
        out.push(row(stage, Task::Burst, PRIOR_RANDOM, "precision", prec));
        out.push(row(stage, Task::Burst, PRIOR_RANDOM, "recall", rec));
        for &b in &betas {
            let f = prec.zip(rec).and_then(|(p, r)| f_beta(p, r, b));
            out.push(row(stage, Task::Burst, PRIOR_RANDOM, &f_name(b), f));
        }
    }

    for run in predictions.iter().filter(|r| r.stage == stage) {
        match run.task {
            Task::Burst => {
                let predicted: Vec<bool> = run.predictions.iter().map(|p| p.predicted > 0.5).collect();
                let truth: Vec<bool> = run.predictions.iter().map(|p| p.truth.expect("labeled") > 0.5).collect();
                let c = Confusion::from_labels(&predicted, &truth);
                out.push(row(stage, run.task, run.model, "n", Some(predicted.len() as f64)));
                out.push(row(stage, run.task, run.model, "precision", c.precision()));
                out.push(row(stage, run.task, run.model, "recall", c.recall()));
                for &b in &betas {
                    out.push(row(stage, run.task, run.model, &f_name(b), c.f_beta(b)));
                }
            }
            Task::Tbb | Task::Tra => {
                let predicted: Vec<f64> = run.predictions.iter().map(|p| p.predicted).collect();
                let truth: Vec<f64> = run.predictions.iter().map(|p| p.truth.expect("labeled")).collect();
                out.push(row(stage, run.task, run.model, "n", Some(predicted.len() as f64)));
                out.push(row(stage, run.task, run.model, "rmse", rmse(&predicted, &truth)));
            }
        }
    }

    // Global mean: every instance gets the mean training target.
    for task in [Task::Tbb, Task::Tra] {
        let Some(m) = models
            .iter()
            .find(|m| m.task == task && m.stage_minutes == stage && m.kind != ModelKind::WeightedLinearSvm)
        else {
            continue;
        };
        let truth: Vec<f64> = test
            .iter()
            .find(|x| x.task == task)
            .map(|x| {
                x.stage_rows(stage)
                    .filter_map(|r| r.tbb.or(r.tra))
                    .map(|v| crate::models::log_target(v as f64))
                    .collect()
            })
            .unwrap_or_default();
        let predicted = vec![m.summary.target_mean; truth.len()];
        out.push(row(stage, task, GLOBAL_MEAN, "n", Some(truth.len() as f64)));
        out.push(row(stage, task, GLOBAL_MEAN, "rmse", rmse(&predicted, &truth)));
    }
    out
}

/// Builds the report. Stages are evaluated in parallel; a stage without
/// eligible instances yields zero counts and undefined metrics.
pub fn staged_evaluation(test: &[FeatureMatrix], models: &[TrainedModel], predictions: &[Prediction], stages: &[u32]) -> Report {
    let runs = staged_runs(predictions);
    let per_stage: Vec<Vec<ReportRow>> = stages.par_iter().map(|&s| stage_rows(s, test, models, &runs)).collect();
    Report {
        stages: stages.to_vec(),
        rows: per_stage.into_iter().flatten().collect(),
    }
}

impl Report {
    pub fn get(&self, stage: u32, task: Task, model: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.stage == stage && r.task == task && r.model == model && r.metric == metric)
            .and_then(|r| r.value)
    }

    /// Distinct model names for a task, in first-seen order, baselines and
    /// the data pseudo-model excluded.
    pub fn models(&self, task: Task) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in self.rows.iter().filter(|r| r.task == task) {
            let m = r.model.as_str();
            if ![DATA, ALL_POSITIVE, PRIOR_RANDOM, GLOBAL_MEAN].contains(&m) && !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), EvaluationError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["stage", "task", "model", "metric", "value"])?;
        for r in &self.rows {
            let v = r.value.map_or_else(|| "undefined".to_string(), |v| v.to_string());
            out.write_record([r.stage.to_string().as_str(), r.task.name(), &r.model, &r.metric, &v])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, EvaluationError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut report = Report::default();
        for rec in rdr.records() {
            let rec = rec?;
            let bad = |what: &str| EvaluationError::Format(format!("{what} '{}'", rec.iter().collect::<Vec<_>>().join(",")));
            let stage: u32 = rec[0].parse().map_err(|_| bad("bad stage in"))?;
            let task = Task::parse(&rec[1]).ok_or_else(|| bad("bad task in"))?;
            let value = match &rec[4] {
                "undefined" => None,
                v => Some(v.parse().map_err(|_| bad("bad value in"))?),
            };
            if !report.stages.contains(&stage) {
                report.stages.push(stage);
            }
            report.rows.push(ReportRow {
                stage,
                task,
                model: rec[2].to_string(),
                metric: rec[3].to_string(),
                value,
            });
        }
        Ok(report)
    }

    /// Tables laid out by stage: class balance, Task 1 scores, Task 2/3
    /// RMSE.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let header = |s: &mut String, first: &str| {
            let _ = write!(s, "| {first} |");
            for st in &self.stages {
                let _ = write!(s, " {} |", stage_tag(*st));
            }
            let _ = write!(s, "\n|---|");
            for _ in &self.stages {
                s.push_str("---:|");
            }
            s.push('\n');
        };
        let line = |s: &mut String, name: &str, f: &dyn Fn(u32) -> String| {
            let _ = write!(s, "| {name} |");
            for &st in &self.stages {
                let _ = write!(s, " {} |", f(st));
            }
            s.push('\n');
        };

        s.push_str("# Evaluation report\n\n## Class balance\n\n");
        header(&mut s, "");
        for m in ["eligible", "positives", "negatives"] {
            line(&mut s, m, &|st| fmt(self.get(st, Task::Burst, DATA, m)).replace(".0000", ""));
        }
        line(&mut s, "positive share", &|st| {
            self.get(st, Task::Burst, DATA, "positive_share")
                .map_or("n/a".into(), |v| format!("{:.2}%", 100.0 * v))
        });

        s.push_str("\n## Burst classification\n\n");
        let mut metrics: Vec<&str> = Vec::new();
        for r in self.rows.iter().filter(|r| r.task == Task::Burst && r.model != DATA) {
            if r.metric != "n" && !metrics.contains(&r.metric.as_str()) {
                metrics.push(&r.metric);
            }
        }
        let mut models = vec![ALL_POSITIVE, PRIOR_RANDOM];
        models.extend(self.models(Task::Burst));
        for metric in metrics {
            let _ = writeln!(s, "### {metric}\n");
            header(&mut s, "model");
            for m in &models {
                line(&mut s, m, &|st| fmt(self.get(st, Task::Burst, m, metric)));
            }
            s.push('\n');
        }

        for (task, title) in [(Task::Tbb, "Time before burst"), (Task::Tra, "Time remaining active")] {
            let _ = writeln!(s, "## {title} (RMSE, log minutes)\n");
            header(&mut s, "model");
            line(&mut s, "instances", &|st| fmt(self.get(st, task, DATA, "eligible")).replace(".0000", ""));
            let mut models = vec![GLOBAL_MEAN];
            models.extend(self.models(task));
            for m in models {
                line(&mut s, m, &|st| fmt(self.get(st, task, m, "rmse")));
            }
            s.push('\n');
        }
        s
    }
}

/// "5min", "1h", "6h".
pub fn stage_tag(minutes: u32) -> String {
    if minutes >= 60 && minutes.is_multiple_of(60) {
        format!("{}h", minutes / 60)
    } else {
        format!("{minutes}min")
    }
}

/// Acceptance thresholds checked after evaluation. Unset checks are skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Minimum F1 of every F1-optimized classifier at the first stage.
    pub min_f1_first_stage: Option<f64>,
    /// F1-optimized classifiers must strictly beat the all-positive and
    /// prior-random baselines at every stage.
    pub beat_classification_baselines: bool,
    /// Every regressor must have a strictly lower RMSE than the global mean
    /// at every stage.
    pub beat_global_mean: bool,
}

/// Violated thresholds, one message each.
pub fn check_thresholds(report: &Report, t: &Thresholds) -> Vec<String> {
    let mut out = Vec::new();
    let f1_models: Vec<&str> = report
        .models(Task::Burst)
        .into_iter()
        .filter(|m| m.ends_with("-f1"))
        .collect();
    let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    if let (Some(min), Some(&first)) = (t.min_f1_first_stage, report.stages.first()) {
        if f1_models.is_empty() {
            out.push("no F1-optimized classifier to check".to_string());
        }
        for m in &f1_models {
            let f = report.get(first, Task::Burst, m, "f1");
            if f.is_none_or(|f| f < min) {
                out.push(format!("{m} F1 at {} is {}, below {min}", stage_tag(first), show(f)));
            }
        }
    }
    for &st in &report.stages {
        if t.beat_classification_baselines {
            for m in &f1_models {
                let f = report.get(st, Task::Burst, m, "f1");
                for b in [ALL_POSITIVE, PRIOR_RANDOM] {
                    let base = report.get(st, Task::Burst, b, "f1");
                    let ok = match (f, base) {
                        (Some(f), Some(base)) => f > base,
                        (Some(_), None) => true,
                        (None, _) => false,
                    };
                    if !ok {
                        out.push(format!("{m} F1 {} does not beat {b} {} at {}", show(f), show(base), stage_tag(st)));
                    }
                }
            }
        }
        if t.beat_global_mean {
            for task in [Task::Tbb, Task::Tra] {
                let base = report.get(st, task, GLOBAL_MEAN, "rmse");
                for m in report.models(task) {
                    let r = report.get(st, task, m, "rmse");
                    let ok = matches!((r, base), (Some(r), Some(b)) if r < b);
                    if !ok {
                        out.push(format!(
                            "{m} {} RMSE {} does not beat the global mean {} at {}",
                            task.name(),
                            show(r),
                            show(base),
                            stage_tag(st)
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Lifecycle statistics as a Markdown table: the shares of bursting
/// hashtags already burst, off-burst and dead at each checkpoint.
pub fn stats_markdown(stats: &[CheckpointStats]) -> String {
    let mut s = String::from("# Lifecycle statistics\n\n");
    if let Some(first) = stats.first() {
        let _ = writeln!(s, "Bursting hashtags: {}\n", first.bursting_cycles);
    }
    s.push_str("| after trigger | already burst | off-burst | dead |\n|---|---:|---:|---:|\n");
    for c in stats {
        let _ = writeln!(
            s,
            "| {} | {:.2}% | {:.2}% | {:.2}% |",
            stage_tag(c.checkpoint_minutes),
            100.0 * c.already_burst,
            100.0 * c.off_burst,
            100.0 * c.dead
        );
    }
    s
}
