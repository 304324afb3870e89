//! Precision, recall, F-beta and RMSE. Undefined values are `None`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn from_labels(predicted: &[bool], truth: &[bool]) -> Self {
        assert_eq!(predicted.len(), truth.len(), "one prediction per label");
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn f_beta(&self, beta: f64) -> Option<f64> {
        f_beta(self.precision()?, self.recall()?, beta)
    }

    pub fn scores(&self, beta: f64) -> PrF {
        PrF {
            precision: self.precision(),
            recall: self.recall(),
            f: self.f_beta(beta),
        }
    }
}

/// `(1 + b^2) P R / (b^2 P + R)`; undefined when both are zero.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> Option<f64> {
    let b2 = beta * beta;
    let d = b2 * precision + recall;
    (d > 0.0).then(|| (1.0 + b2) * precision * recall / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrF {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f: Option<f64>,
}

pub fn precision_recall_f(predicted: &[bool], truth: &[bool], beta: f64) -> PrF {
    Confusion::from_labels(predicted, truth).scores(beta)
}

/// Root mean squared error; `None` for an empty set.
pub fn rmse(predicted: &[f64], truth: &[f64]) -> Option<f64> {
    assert_eq!(predicted.len(), truth.len(), "one prediction per target");
    if predicted.is_empty() {
        return None;
    }
    let mse = predicted.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / predicted.len() as f64;
    Some(mse.sqrt())
}
