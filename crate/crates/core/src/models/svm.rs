//! Linear soft-margin SVM with a positive-class weight, trained by
//! stochastic subgradient descent (Pegasos step sizes, iterate averaging).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Soft-margin constant; the L2 penalty is `1 / (C n)`.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 40,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Zero scores go to the positive class.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.score(x) >= 0.0
    }
}

/// Minimizes `lambda/2 |w|^2 + 1/n sum c_i max(0, 1 - y_i (w.x_i + b))` with
/// `c_i = positive_weight` for positives and 1 otherwise. The bias is an
/// extra constant-1 feature. The returned model averages the iterates of the
/// second half of training.
pub fn train_weighted_svm(
    x: &[Vec<f64>],
    y: &[bool],
    positive_weight: f64,
    cfg: &SvmConfig,
) -> Result<LinearClassifier, ModelError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(ModelError::DegenerateData("need one label per row and at least one row".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(ModelError::DegenerateData("training set has a single class".into()));
    }
    if !(positive_weight > 0.0) || !(cfg.c > 0.0) || cfg.epochs == 0 {
        return Err(ModelError::InvalidConfig("weight, C and epochs must be positive".into()));
    }
    let n = x.len();
    let d = x[0].len();
    let lambda = 1.0 / (cfg.c * n as f64);
    // w[d] is the bias.
    let mut w = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let mut averaged = 0u64;
    let total = (cfg.epochs * n) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let yi = if y[i] { 1.0 } else { -1.0 };
            let margin = yi * (w[..d].iter().zip(&x[i]).map(|(a, b)| a * b).sum::<f64>() + w[d]);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                let step = eta * yi * if y[i] { positive_weight } else { 1.0 };
                for (wj, xj) in w[..d].iter_mut().zip(&x[i]) {
                    *wj += step * xj;
                }
                w[d] += step;
            }
            if 2 * t > total {
                averaged += 1;
                let k = averaged as f64;
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += (v - *a) / k;
                }
            }
        }
    }
    let bias = avg.pop().unwrap_or(0.0);
    Ok(LinearClassifier { weights: avg, bias })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_toy_set() {
        let x = vec![vec![2.0, 2.0], vec![3.0, 1.5], vec![2.5, 3.0], vec![-2.0, -1.0], vec![-1.5, -2.5], vec![-3.0, -2.0]];
        let y = vec![true, true, true, false, false, false];
        for w in [1.0, 3.0, 6.0] {
            let m = train_weighted_svm(&x, &y, w, &SvmConfig::default()).unwrap();
            for (xi, &yi) in x.iter().zip(&y) {
                assert_eq!(m.predict(xi), yi);
            }
        }
    }

    #[test]
    fn identical_rows_follow_weighted_majority() {
        let x = vec![vec![1.0, 1.0]; 10];
        let y: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let light = train_weighted_svm(&x, &y, 1.0, &SvmConfig::default()).unwrap();
        assert!(!light.predict(&x[0]));
        let heavy = train_weighted_svm(&x, &y, 4.0, &SvmConfig::default()).unwrap();
        assert!(heavy.predict(&x[0]));
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_weighted_svm(&x, &[true, true], 1.0, &SvmConfig::default()),
            Err(ModelError::DegenerateData(_))
        ));
    }

    #[test]
    fn boundary_and_sign_symmetry() {
        let m = LinearClassifier {
            weights: vec![0.0, 0.0],
            bias: 0.0,
        };
        assert!(m.predict(&[1.0, -1.0]));
        let neg = LinearClassifier {
            weights: vec![0.0, 0.0],
            bias: -1.0,
        };
        assert!(!neg.predict(&[5.0, 5.0]));
        let a = LinearClassifier {
            weights: vec![0.5, -2.0],
            bias: 0.1,
        };
        let b = LinearClassifier {
            weights: vec![-0.5, 2.0],
            bias: 0.1,
        };
        for x in [[1.0, 0.3], [-2.0, 0.5], [0.0, 0.0]] {
            assert_eq!(a.predict(&x), b.predict(&[-x[0], -x[1]]));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 7) as f64, (i % 5) as f64 - 2.0]).collect();
        let y: Vec<bool> = (0..50).map(|i| i % 7 > 4).collect();
        let a = train_weighted_svm(&x, &y, 2.0, &SvmConfig::default()).unwrap();
        let b = train_weighted_svm(&x, &y, 2.0, &SvmConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
