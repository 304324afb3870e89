//! Task 1 weighted classifier and Task 2/3 regressors over log minutes.
//!
//! Every model carries the z-score statistics of its training features, so
//! callers pass raw feature vectors in schema order.

mod cart;
mod linear;
mod optimize;
mod split;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cart::{fit_cart, CartConfig, RegressionTree, TreeNode};
pub use linear::{fit_linear, LinearRegressor};
pub use optimize::{optimize_classifier, pnr, select_weight, weight_grid, GridPoint, OptimizedClassifier};
pub use split::stratified_split;
pub use svm::{train_weighted_svm, LinearClassifier, SvmConfig};

use crate::features::{NormStats, Task, ALPHA, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("class-weight grid is empty")]
    EmptyGrid,
    #[error("F-score is undefined: {0}")]
    UndefinedF(String),
    #[error("singular least-squares system: {0}")]
    Singular(String),
    #[error("feature vector has {found} values, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("a {found:?} model cannot {action}")]
    WrongKind { found: ModelKind, action: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    WeightedLinearSvm,
    LinearRegression,
    Cart,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::WeightedLinearSvm => "weighted-linear-svm",
            ModelKind::LinearRegression => "linear-regression",
            ModelKind::Cart => "cart",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        [ModelKind::WeightedLinearSvm, ModelKind::LinearRegression, ModelKind::Cart]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Svm(LinearClassifier),
    Linear(LinearRegressor),
    Tree(RegressionTree),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub rows: usize,
    /// Positives among training rows (classifiers).
    pub positives: usize,
    /// Positive rate of the full training set, used by the prior-random
    /// baseline.
    pub positive_rate: f64,
    /// Mean log-minute target (regressors), used by the global-mean baseline.
    pub target_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub task: Task,
    pub stage_minutes: u32,
    /// F-beta objective of a classifier.
    pub beta: Option<f64>,
    pub schema_version: u32,
    pub dims: usize,
    pub norm: NormStats,
    pub params: ModelParams,
    /// Chosen positive-class weight.
    pub class_weight: Option<f64>,
    pub trace: Vec<GridPoint>,
    pub summary: TrainingSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub beta: f64,
    pub svm: SvmConfig,
    /// Share of rows in TNS; the rest form TTS.
    pub train_fraction: f64,
    pub split_seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            beta: 1.0,
            svm: SvmConfig::default(),
            train_fraction: 0.75,
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    /// Ridge penalty for singular least-squares systems; `None` makes them
    /// an error.
    pub ridge: Option<f64>,
    pub cart: CartConfig,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            ridge: Some(1.0),
            cart: CartConfig::default(),
        }
    }
}

fn check_rows(x: &[Vec<f64>]) -> Result<usize, ModelError> {
    let dims = x.first().map_or(ALPHA, Vec::len);
    for r in x {
        if r.len() != dims {
            return Err(ModelError::SchemaMismatch {
                expected: dims,
                found: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::DegenerateData("non-finite feature value".into()));
        }
    }
    Ok(dims)
}

fn normalize(norm: &NormStats, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| norm.apply(r)).collect()
}

/// Splits into TNS/TTS, z-scores with TNS statistics and runs the weight
/// search.
pub fn train_classifier(x: &[Vec<f64>], y: &[bool], stage_minutes: u32, cfg: &ClassifierConfig) -> Result<TrainedModel, ModelError> {
    let dims = check_rows(x)?;
    if x.len() != y.len() {
        return Err(ModelError::DegenerateData("need one label per row".into()));
    }
    let (tns, tts) = stratified_split(y, cfg.train_fraction, cfg.split_seed)?;
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<bool>) {
        (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (tns_x, tns_y) = pick(&tns);
    let (tts_x, tts_y) = pick(&tts);
    let norm = NormStats::fit(tns_x.iter().map(Vec::as_slice), dims);
    let opt = optimize_classifier(
        &normalize(&norm, &tns_x),
        &tns_y,
        &normalize(&norm, &tts_x),
        &tts_y,
        cfg.beta,
        &cfg.svm,
    )?;
    let positives = y.iter().filter(|&&v| v).count();
    Ok(TrainedModel {
        kind: ModelKind::WeightedLinearSvm,
        task: Task::Burst,
        stage_minutes,
        beta: Some(cfg.beta),
        schema_version: SCHEMA_VERSION,
        dims,
        norm,
        params: ModelParams::Svm(opt.classifier),
        class_weight: Some(opt.w),
        trace: opt.trace,
        summary: TrainingSummary {
            rows: y.len(),
            positives,
            positive_rate: positives as f64 / y.len() as f64,
            target_mean: 0.0,
        },
    })
}

/// `ln(max(minutes, 1))`.
pub fn log_target(minutes: f64) -> f64 {
    minutes.max(1.0).ln()
}

/// Back-transform of a log-minute prediction.
pub fn display_minutes(log_minutes: f64) -> f64 {
    log_minutes.exp()
}

/// Fits a regressor on log-transformed minute targets.
pub fn train_regressor(
    x: &[Vec<f64>],
    minutes: &[f64],
    kind: ModelKind,
    task: Task,
    stage_minutes: u32,
    cfg: &RegressorConfig,
) -> Result<TrainedModel, ModelError> {
    let dims = check_rows(x)?;
    if x.is_empty() || x.len() != minutes.len() {
        return Err(ModelError::DegenerateData("need one target per row and at least one row".into()));
    }
    let y: Vec<f64> = minutes.iter().map(|&m| log_target(m)).collect();
    let norm = NormStats::fit(x.iter().map(Vec::as_slice), dims);
    let z = normalize(&norm, x);
    let params = match kind {
        ModelKind::LinearRegression => ModelParams::Linear(fit_linear(&z, &y, cfg.ridge)?),
        ModelKind::Cart => ModelParams::Tree(fit_cart(&z, &y, &cfg.cart)?),
        ModelKind::WeightedLinearSvm => {
            return Err(ModelError::WrongKind {
                found: kind,
                action: "be trained as a regressor",
            })
        }
    };
    Ok(TrainedModel {
        kind,
        task,
        stage_minutes,
        beta: None,
        schema_version: SCHEMA_VERSION,
        dims,
        norm,
        params,
        class_weight: None,
        trace: Vec::new(),
        summary: TrainingSummary {
            rows: y.len(),
            positives: 0,
            positive_rate: 0.0,
            target_mean: y.iter().sum::<f64>() / y.len() as f64,
        },
    })
}

impl TrainedModel {
    /// Short display name: the kind, plus the F-score objective of
    /// classifiers.
    pub fn label(&self) -> String {
        match self.beta {
            Some(b) => format!("{}-f{}", self.kind.name(), b),
            None => self.kind.name().to_string(),
        }
    }

    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.dims {
            return Err(ModelError::SchemaMismatch {
                expected: self.dims,
                found: x.len(),
            });
        }
        Ok(self.norm.apply(x))
    }
}

/// Class (`true` = bursting) and raw score; a score of 0 is positive.
pub fn predict_label(model: &TrainedModel, x: &[f64]) -> Result<(bool, f64), ModelError> {
    let z = model.prepare(x)?;
    match &model.params {
        ModelParams::Svm(c) => {
            let s = c.score(&z);
            Ok((s >= 0.0, s))
        }
        _ => Err(ModelError::WrongKind {
            found: model.kind,
            action: "predict a class label",
        }),
    }
}

/// Log-minute prediction of a regressor.
pub fn predict_time(model: &TrainedModel, x: &[f64]) -> Result<f64, ModelError> {
    let z = model.prepare(x)?;
    match &model.params {
        ModelParams::Linear(m) => Ok(m.predict(&z)),
        ModelParams::Tree(t) => Ok(t.predict(&z)),
        ModelParams::Svm(_) => Err(ModelError::WrongKind {
            found: model.kind,
            action: "predict a time",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i % 13) as f64, ((i * 7) % 11) as f64, 3.0])
            .collect();
        let y = x.iter().map(|r| r[0] + 0.5 * r[1] > 13.0).collect();
        (x, y)
    }

    #[test]
    fn classifier_round_trip_through_json() {
        let (x, y) = toy(120);
        let m = train_classifier(&x, &y, 5, &ClassifierConfig::default()).unwrap();
        assert!(!m.trace.is_empty());
        let text = serde_json::to_string(&m).unwrap();
        let back: TrainedModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        for r in &x {
            assert_eq!(predict_label(&m, r).unwrap(), predict_label(&back, r).unwrap());
        }
        assert!(matches!(
            predict_label(&m, &[1.0]),
            Err(ModelError::SchemaMismatch { expected: 3, found: 1 })
        ));
        assert!(predict_time(&m, &x[0]).is_err());
    }

    #[test]
    fn regressors_predict_log_minutes() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let minutes: Vec<f64> = vec![20.0; 30];
        for kind in [ModelKind::LinearRegression, ModelKind::Cart] {
            let m = train_regressor(&x, &minutes, kind, Task::Tbb, 5, &RegressorConfig::default()).unwrap();
            assert!((predict_time(&m, &[3.0]).unwrap() - 20f64.ln()).abs() < 1e-9);
            assert!((display_minutes(predict_time(&m, &[3.0]).unwrap()) - 20.0).abs() < 1e-6);
        }
        assert_eq!(log_target(0.0), 0.0);
    }

    #[test]
    fn linear_model_on_zero_vector_returns_bias() {
        let m = TrainedModel {
            kind: ModelKind::LinearRegression,
            task: Task::Tra,
            stage_minutes: 5,
            beta: None,
            schema_version: SCHEMA_VERSION,
            dims: 2,
            norm: NormStats {
                mean: vec![0.0, 0.0],
                std: vec![1.0, 1.0],
            },
            params: ModelParams::Linear(LinearRegressor {
                intercept: 2.5,
                coefficients: vec![1.0, -1.0],
                ridge_lambda: None,
            }),
            class_weight: None,
            trace: vec![],
            summary: TrainingSummary {
                rows: 0,
                positives: 0,
                positive_rate: 0.0,
                target_mean: 0.0,
            },
        };
        assert_eq!(predict_time(&m, &[0.0, 0.0]).unwrap(), 2.5);
        let cart = TrainedModel {
            kind: ModelKind::Cart,
            params: ModelParams::Tree(RegressionTree {
                nodes: vec![TreeNode::Leaf { value: 3.0, samples: 4 }],
            }),
            ..m
        };
        assert_eq!(predict_time(&cart, &[7.0, 1.0]).unwrap(), 3.0);
    }
}
