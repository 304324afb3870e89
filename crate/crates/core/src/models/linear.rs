//! Least-squares linear regression with a ridge fallback.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Relative size below which an R diagonal entry counts as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegressor {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Penalty used when the least-squares system was singular.
    pub ridge_lambda: Option<f64>,
}

impl LinearRegressor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Fits `y ~ b0 + X b` by QR. Columns that are constant carry no information
/// beyond the intercept and get coefficient 0. If the remaining system is
/// still rank deficient the fit falls back to ridge regression with an
/// unpenalized intercept, or fails when no penalty is configured.
pub fn fit_linear(x: &[Vec<f64>], y: &[f64], ridge: Option<f64>) -> Result<LinearRegressor, ModelError> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(ModelError::DegenerateData("need one target per row and at least one row".into()));
    }
    let d = x[0].len();
    let active: Vec<usize> = (0..d).filter(|&j| x.iter().any(|r| r[j] != x[0][j])).collect();
    let p = active.len() + 1;
    let mut a = DMatrix::from_fn(n, p, |i, k| if k == 0 { 1.0 } else { x[i][active[k - 1]] });
    let b = DVector::from_column_slice(y);
    let scales: Vec<f64> = (0..p).map(|k| a.column(k).norm()).collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).unscale_mut(*s);
    }

    let mut coefficients = vec![0.0; d];
    if n >= p {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let full_rank = r.diagonal().iter().all(|v| v.abs() > RANK_TOL * diag_max);
        if full_rank {
            let sol = r
                .solve_upper_triangular(&(qr.q().transpose() * &b))
                .expect("full-rank triangular system");
            for (k, &j) in active.iter().enumerate() {
                coefficients[j] = sol[k + 1] / scales[k + 1];
            }
            return Ok(LinearRegressor {
                intercept: sol[0] / scales[0],
                coefficients,
                ridge_lambda: None,
            });
        }
    }

    let lambda = ridge.ok_or_else(|| {
        ModelError::Singular(format!("{n} rows, {p} effective columns and no ridge penalty configured"))
    })?;
    if !(lambda > 0.0) {
        return Err(ModelError::InvalidConfig("ridge penalty must be positive".into()));
    }
    let k = active.len();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = active.iter().map(|&j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let xc = DMatrix::from_fn(n, k, |i, c| x[i][active[c]] - means[c]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let gram = xc.transpose() * &xc + DMatrix::identity(k, k) * lambda;
    let rhs = xc.transpose() * yc;
    let sol = gram
        .cholesky()
        .ok_or_else(|| ModelError::Singular("ridge system is not positive definite".into()))?
        .solve(&rhs);
    let mut intercept = y_mean;
    for (c, &j) in active.iter().enumerate() {
        coefficients[j] = sol[c];
        intercept -= sol[c] * means[c];
    }
    Ok(LinearRegressor {
        intercept,
        coefficients,
        ridge_lambda: Some(lambda),
    })
}
