//! Deterministic stratified train / training-test partition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelError;

/// Splits row indices so that each class contributes `train_fraction` of its
/// rows (rounded) to the training part. Every class with at least two rows
/// keeps one in each part. Both index lists come back sorted.
pub fn stratified_split(labels: &[bool], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), ModelError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ModelError::InvalidConfig(format!(
            "train fraction {train_fraction} must be in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let mut k = (n as f64 * train_fraction).round() as usize;
        if n >= 2 {
            k = k.clamp(1, n - 1);
        }
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
