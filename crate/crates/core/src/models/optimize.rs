//! Class-weight search: train one weighted SVM per grid weight on TNS and
//! keep the one with the best F-beta on TTS.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{train_weighted_svm, LinearClassifier, SvmConfig};
use super::ModelError;
use crate::evaluation::Confusion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub w: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedClassifier {
    pub classifier: LinearClassifier,
    pub w: f64,
    pub f: Option<f64>,
    pub pnr: f64,
    pub trace: Vec<GridPoint>,
}

/// Negatives per positive.
pub fn pnr(labels: &[bool]) -> Result<f64, ModelError> {
    let pos = labels.iter().filter(|&&v| v).count();
    if pos == 0 || pos == labels.len() {
        return Err(ModelError::DegenerateData("training set has a single class".into()));
    }
    Ok((labels.len() - pos) as f64 / pos as f64)
}

/// `{1, 2, ..., 2 * ceil(pnr)}`.
pub fn weight_grid(pnr: f64) -> Vec<f64> {
    let top = 2 * pnr.ceil().max(0.0) as u64;
    (1..=top).map(|w| w as f64).collect()
}

/// Index of the first grid point whose F strictly beats every earlier one,
/// starting from 0. Undefined F never wins. When nothing beats 0 the first
/// point is returned.
pub fn select_weight(trace: &[GridPoint]) -> Result<usize, ModelError> {
    if trace.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    let mut best = 0;
    let mut f_max = 0.0;
    for (i, p) in trace.iter().enumerate() {
        if let Some(f) = p.f {
            if f > f_max {
                f_max = f;
                best = i;
            }
        }
    }
    Ok(best)
}

pub fn optimize_classifier(
    tns_x: &[Vec<f64>],
    tns_y: &[bool],
    tts_x: &[Vec<f64>],
    tts_y: &[bool],
    beta: f64,
    svm: &SvmConfig,
) -> Result<OptimizedClassifier, ModelError> {
    if !tts_y.iter().any(|&v| v) {
        return Err(ModelError::UndefinedF("training-test set has no positives".into()));
    }
    let ratio = pnr(tns_y)?;
    let grid = weight_grid(ratio);
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    let fitted = grid
        .par_iter()
        .map(|&w| {
            let c = train_weighted_svm(tns_x, tns_y, w, svm)?;
            let pred: Vec<bool> = tts_x.iter().map(|x| c.predict(x)).collect();
            let s = Confusion::from_labels(&pred, tts_y).scores(beta);
            Ok((
                c,
                GridPoint {
                    w,
                    precision: s.precision,
                    recall: s.recall,
                    f: s.f,
                },
            ))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let trace: Vec<GridPoint> = fitted.iter().map(|(_, p)| *p).collect();
    let best = select_weight(&trace)?;
    let (classifier, point) = fitted.into_iter().nth(best).expect("index within grid");
    Ok(OptimizedClassifier {
        classifier,
        w: point.w,
        f: point.f,
        pnr: ratio,
        trace,
    })
}
