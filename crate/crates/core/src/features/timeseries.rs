//! Shape features of the count series `<c_s, ..., c_tp>`: derivative
//! statistics and polynomial coefficients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const MAX_POLY_ORDER: usize = 6;

/// mean_value, std_value, d_last_first, d_last_max, d_last_min, idx_max,
/// mean_fod, std_fod, last_fod, max_fod, d_pfod_nfod.
pub fn derivative_features(series: &[u32]) -> [f64; 11] {
    assert!(!series.is_empty(), "series covers at least the trigger minute");
    let c: Vec<f64> = series.iter().map(|&v| v as f64).collect();
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let std = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let first = c[0];
    let last = c[c.len() - 1];
    let mut idx_max = 0;
    let mut min = first;
    for (i, &v) in c.iter().enumerate() {
        if v > c[idx_max] {
            idx_max = i;
        }
        min = min.min(v);
    }
    let max = c[idx_max];
    let mut out = [mean, std, last - first, last - max, last - min, idx_max as f64, 0.0, 0.0, 0.0, 0.0, 0.0];
    if c.len() < 2 {
        return out;
    }
    let diffs: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let m = diffs.len() as f64;
    let mean_fod = diffs.iter().map(|d| d.abs()).sum::<f64>() / m;
    let std_fod = (diffs.iter().map(|d| (d.abs() - mean_fod).powi(2)).sum::<f64>() / m).sqrt();
    let max_fod = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pfod = diffs.iter().filter(|&&d| d >= 0.0).count() as f64;
    out[6] = mean_fod;
    out[7] = std_fod;
    out[8] = diffs[diffs.len() - 1];
    out[9] = max_fod;
    out[10] = pfod - (m - pfod);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub beta: usize,
    /// `w_0..w_6`; entries above `beta` are zero.
    pub coeffs: [f64; MAX_POLY_ORDER + 1],
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, w| acc * x + w)
    }
}

/// Least-squares polynomial over `x = 0..len-1` with order
/// `min(len - 1, 6)`. The system is solved by QR in the scaled variable
/// `x / (len - 1)` and mapped back, which keeps it well conditioned for
/// series several hours long.
pub fn polyfit(series: &[u32]) -> PolyFit {
    assert!(!series.is_empty(), "series covers at least the trigger minute");
    let n = series.len();
    let beta = (n - 1).min(MAX_POLY_ORDER);
    let mut coeffs = [0.0; MAX_POLY_ORDER + 1];
    if beta == 0 {
        coeffs[0] = series[0] as f64;
        return PolyFit { beta, coeffs };
    }
    let scale = (n - 1) as f64;
    let a = DMatrix::from_fn(n, beta + 1, |i, k| (i as f64 / scale).powi(k as i32));
    let b = DVector::from_iterator(n, series.iter().map(|&v| v as f64));
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    let scaled = qr
        .r()
        .solve_upper_triangular(&qtb)
        .expect("Vandermonde columns on distinct points are independent");
    for k in 0..=beta {
        coeffs[k] = scaled[k] / scale.powi(k as i32);
    }
    PolyFit { beta, coeffs }
}
