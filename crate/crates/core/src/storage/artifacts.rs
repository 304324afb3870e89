//! Where each pipeline product lives and how it is encoded.

use super::{ArtifactKind, ArtifactManifest, Store, StorageError};
use crate::evaluation::{Prediction, Report};
use crate::features::{FeatureMatrix, Task};
use crate::lifecycle::{HashtagSnapshot, LifecycleEvent};
use crate::models::TrainedModel;
use crate::pipeline::{Dataset, HistoricTables, LifecycleSummary};
use crate::synth::{read_truth_csv, write_truth_csv, StreamScenario, TruthRecord};

/// Relative paths of every artifact.
pub struct Layout;

impl Layout {
    pub fn scenario(d: Dataset) -> String {
        format!("data/streams/{}.scenario.json", d.name())
    }

    pub fn stream(d: Dataset) -> String {
        format!("data/streams/{}.jsonl", d.name())
    }

    pub fn truth(d: Dataset) -> String {
        format!("data/streams/{}.truth.csv", d.name())
    }

    pub fn events(d: Dataset) -> String {
        format!("data/events/{}.events.jsonl", d.name())
    }

    pub fn snapshots(d: Dataset) -> String {
        format!("data/events/{}.snapshots.jsonl", d.name())
    }

    pub fn features(d: Dataset, task: Task) -> String {
        format!("data/features/{}/{}.csv", d.name(), task.name())
    }

    pub fn tables() -> String {
        "models/historic_tables.json".into()
    }

    pub fn model(m: &TrainedModel) -> String {
        format!("models/{}/{}min-{}.json", m.task.name(), m.stage_minutes, m.label())
    }

    pub fn model_catalog() -> String {
        "models/catalog.json".into()
    }

    pub fn predictions(d: Dataset) -> String {
        format!("reports/{}.predictions.csv", d.name())
    }

    pub fn report_csv() -> String {
        "reports/report.csv".into()
    }

    pub fn report_md() -> String {
        "reports/report.md".into()
    }

    pub fn stats(d: Dataset) -> String {
        format!("reports/{}.lifecycle_stats.json", d.name())
    }

    pub fn stats_md(d: Dataset) -> String {
        format!("reports/{}.lifecycle_stats.md", d.name())
    }
}

impl Store {
    pub fn save_scenario(&self, d: Dataset, sc: &StreamScenario) -> Result<ArtifactManifest, StorageError> {
        self.save_json(ArtifactKind::Scenario, &Layout::scenario(d), sc)
    }

    pub fn load_scenario(&self, d: Dataset) -> Result<StreamScenario, StorageError> {
        self.load_json(ArtifactKind::Scenario, &Layout::scenario(d))
    }

    pub fn save_truth(&self, d: Dataset, truth: &[TruthRecord]) -> Result<ArtifactManifest, StorageError> {
        let rel = Layout::truth(d);
        self.save_with(ArtifactKind::Truth, &rel, |w| {
            write_truth_csv(truth, w).map_err(|e| StorageError::format(&rel, e))
        })
    }

    pub fn load_truth(&self, d: Dataset) -> Result<Vec<TruthRecord>, StorageError> {
        let rel = Layout::truth(d);
        read_truth_csv(self.open_verified(ArtifactKind::Truth, &rel)?).map_err(|e| StorageError::format(&rel, e))
    }

    pub fn save_events(&self, d: Dataset, events: &[LifecycleEvent]) -> Result<ArtifactManifest, StorageError> {
        self.save_jsonl(ArtifactKind::Events, &Layout::events(d), events)
    }

    pub fn load_events(&self, d: Dataset) -> Result<Vec<LifecycleEvent>, StorageError> {
        self.load_jsonl(ArtifactKind::Events, &Layout::events(d))
    }

    pub fn save_snapshots(&self, d: Dataset, snaps: &[HashtagSnapshot]) -> Result<ArtifactManifest, StorageError> {
        self.save_jsonl(ArtifactKind::Snapshots, &Layout::snapshots(d), snaps)
    }

    pub fn load_snapshots(&self, d: Dataset) -> Result<Vec<HashtagSnapshot>, StorageError> {
        self.load_jsonl(ArtifactKind::Snapshots, &Layout::snapshots(d))
    }

    pub fn save_features(&self, d: Dataset, matrices: &[FeatureMatrix]) -> Result<Vec<ArtifactManifest>, StorageError> {
        matrices
            .iter()
            .map(|m| {
                let rel = Layout::features(d, m.task);
                self.save_with(ArtifactKind::Features, &rel, |w| {
                    m.write_csv(w).map_err(|e| StorageError::format(&rel, e))
                })
            })
            .collect()
    }

    /// All three task matrices of a dataset.
    pub fn load_features(&self, d: Dataset) -> Result<Vec<FeatureMatrix>, StorageError> {
        Task::ALL
            .into_iter()
            .map(|task| {
                let rel = Layout::features(d, task);
                let r = self.open_verified(ArtifactKind::Features, &rel)?;
                FeatureMatrix::read_csv(task, r).map_err(|e| StorageError::format(&rel, e))
            })
            .collect()
    }

    pub fn save_tables(&self, tables: &HistoricTables) -> Result<ArtifactManifest, StorageError> {
        self.save_json(ArtifactKind::Tables, &Layout::tables(), tables)
    }

    pub fn load_tables(&self) -> Result<HistoricTables, StorageError> {
        self.load_json(ArtifactKind::Tables, &Layout::tables())
    }

    /// One file per model plus a catalog listing them in order.
    pub fn save_models(&self, models: &[TrainedModel]) -> Result<ArtifactManifest, StorageError> {
        let mut paths = Vec::with_capacity(models.len());
        for m in models {
            let rel = Layout::model(m);
            self.save_json(ArtifactKind::Model, &rel, m)?;
            paths.push(rel);
        }
        self.save_json(ArtifactKind::ModelCatalog, &Layout::model_catalog(), &paths)
    }

    pub fn load_models(&self) -> Result<Vec<TrainedModel>, StorageError> {
        let paths: Vec<String> = self.load_json(ArtifactKind::ModelCatalog, &Layout::model_catalog())?;
        paths.iter().map(|rel| self.load_json(ArtifactKind::Model, rel)).collect()
    }

    pub fn save_predictions(&self, d: Dataset, preds: &[Prediction]) -> Result<ArtifactManifest, StorageError> {
        let rel = Layout::predictions(d);
        self.save_with(ArtifactKind::Predictions, &rel, |w| {
            let mut out = csv::Writer::from_writer(w);
            for p in preds {
                out.serialize(p).map_err(|e| StorageError::format(&rel, e))?;
            }
            out.flush().map_err(|e| StorageError::format(&rel, e))
        })
    }

    pub fn load_predictions(&self, d: Dataset) -> Result<Vec<Prediction>, StorageError> {
        let rel = Layout::predictions(d);
        let r = self.open_verified(ArtifactKind::Predictions, &rel)?;
        csv::Reader::from_reader(r)
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| StorageError::format(&rel, e))
    }

    /// The report as CSV and as markdown.
    pub fn save_report(&self, report: &Report) -> Result<ArtifactManifest, StorageError> {
        let rel = Layout::report_csv();
        let m = self.save_with(ArtifactKind::Report, &rel, |w| {
            report.write_csv(w).map_err(|e| StorageError::format(&rel, e))
        })?;
        self.save_bytes(ArtifactKind::Report, &Layout::report_md(), report.to_markdown().as_bytes())?;
        Ok(m)
    }

    pub fn load_report(&self) -> Result<Report, StorageError> {
        let rel = Layout::report_csv();
        Report::read_csv(self.open_verified(ArtifactKind::Report, &rel)?).map_err(|e| StorageError::format(&rel, e))
    }

    pub fn save_stats(&self, d: Dataset, summary: &LifecycleSummary) -> Result<ArtifactManifest, StorageError> {
        let m = self.save_json(ArtifactKind::Stats, &Layout::stats(d), summary)?;
        self.save_bytes(ArtifactKind::Stats, &Layout::stats_md(d), summary.to_markdown().as_bytes())?;
        Ok(m)
    }

    pub fn load_stats(&self, d: Dataset) -> Result<LifecycleSummary, StorageError> {
        self.load_json(ArtifactKind::Stats, &Layout::stats(d))
    }
}
