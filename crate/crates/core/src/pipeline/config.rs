use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::evaluation::Thresholds;
use crate::features::SaxConfig;
use crate::lifecycle::{EngineConfig, LifecycleParams};
use crate::models::{ClassifierConfig, ModelKind, RegressorConfig};
use crate::synth::StreamScenario;

/// The three streams of a run. Each is its own generated scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    /// Source of prototypes and top-gram tables.
    Historic,
    Train,
    Test,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Historic, Dataset::Train, Dataset::Test];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Historic => "historic",
            Dataset::Train => "train",
            Dataset::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Dataset> {
        Dataset::ALL.into_iter().find(|d| d.name() == s)
    }

    /// Distinct generator seeds for the three roles of one run seed.
    pub fn seed(self, run_seed: u64) -> u64 {
        run_seed.wrapping_mul(3).wrapping_add(self as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub delta: u32,
    pub window_minutes: u32,
    pub stages: Vec<u32>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub emoticon_lexicon: Option<PathBuf>,
    /// Base scenario for `simulate`; the benchmark preset when unset.
    pub scenario: Option<PathBuf>,
    pub seed: u64,
    /// F-beta objectives; one classifier per value and stage.
    pub betas: Vec<f64>,
    pub regressors: Vec<ModelKind>,
    pub classifier: ClassifierConfig,
    pub regressor: RegressorConfig,
    pub sax: SaxConfig,
    pub thresholds: Thresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            delta: 50,
            window_minutes: 5,
            stages: vec![5, 15, 30, 60, 180, 360],
            sentiment_lexicon: None,
            emoticon_lexicon: None,
            scenario: None,
            seed: 0,
            betas: vec![1.0],
            regressors: vec![ModelKind::LinearRegression, ModelKind::Cart],
            classifier: ClassifierConfig::default(),
            regressor: RegressorConfig::default(),
            sax: SaxConfig::default(),
            thresholds: Thresholds::default(),
        }
    }
}

impl RunConfig {
    pub fn lifecycle(&self) -> LifecycleParams {
        LifecycleParams {
            delta: self.delta,
            window_minutes: self.window_minutes,
            ..LifecycleParams::default()
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig::new(self.lifecycle(), self.stages.clone())
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.lifecycle().validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.stages.is_empty() {
            return bad("no prediction stages".into());
        }
        if self.stages.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("stages {:?} must be strictly increasing", self.stages));
        }
        if self.stages[0] == 0 || *self.stages.last().expect("non-empty") >= self.lifecycle().burst_horizon_minutes {
            return bad("stages must lie strictly inside the burst horizon".into());
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad(format!("betas {:?} must be positive", self.betas));
        }
        if self.regressors.contains(&ModelKind::WeightedLinearSvm) {
            return bad("the SVM is not a regressor".into());
        }
        let f = self.classifier.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return bad(format!("train fraction {f} outside (0, 1)"));
        }
        if self.classifier.svm.c <= 0.0 || self.classifier.svm.epochs == 0 {
            return bad("SVM needs C > 0 and at least one epoch".into());
        }
        if self.regressor.cart.min_leaf == 0 {
            return bad("CART min_leaf must be at least 1".into());
        }
        self.sax.validate()?;
        Ok(())
    }

    /// The scenario for one role, with this run's seed and lifecycle. The
    /// scenario keeps its own stages: they bin its class-balance profile and
    /// need not match the prediction stages.
    pub fn scenario_for(&self, dataset: Dataset, base: &StreamScenario) -> StreamScenario {
        StreamScenario {
            seed: dataset.seed(self.seed),
            lifecycle: self.lifecycle(),
            ..base.clone()
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
