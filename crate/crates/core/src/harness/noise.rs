use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, DenseMatrix};

use super::{HarnessError, LabeledDataset};

/// `X + E` with `E_ij ~ N(0, variance)`, drawn from a ChaCha8 stream seeded
/// with `seed` in column-major entry order. `variance == 0` returns `X` unchanged.
pub fn add_gaussian_noise(x: &DenseMatrix, variance: f64, seed: u64) -> Result<DenseMatrix, HarnessError> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(HarnessError::InvalidConfig(format!("noise variance must be >= 0, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(x.clone());
    }
    let sigma = variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            let e: f64 = rng.sample(StandardNormal);
            out[(i, j)] += sigma * e;
        }
    }
    Ok(out)
}

/// Parameters of the bundled Gaussian-blob generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub dim: usize,
    pub per_class: usize,
    /// Norm of each class centre relative to the within-class spread.
    pub separation: f64,
    pub seed: u64,
}

/// Gaussian blobs: class `c` has centre `s·u_c` for a random unit direction
/// `u_c`, and samples `s·u_c + e` with `e ~ N(0, I/d)` (so `E‖e‖² = 1`).
/// Columns are grouped by class in label order.
pub fn synthetic_blobs(cfg: &SynthConfig) -> Result<LabeledDataset, HarnessError> {
    let SynthConfig { classes, dim, per_class, separation, seed } = *cfg;
    if classes < 2 || dim == 0 || per_class == 0 {
        return Err(HarnessError::InvalidConfig(format!(
            "need classes >= 2, dim >= 1, per_class >= 1; got {classes}, {dim}, {per_class}"
        )));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(HarnessError::InvalidConfig(format!("separation must be >= 0, got {separation}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = (1.0 / dim as f64).sqrt();
    let mut columns = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm2(&u).max(f64::MIN_POSITIVE);
        u.iter_mut().for_each(|v| *v *= separation / n);
        for _ in 0..per_class {
            let col: Vec<f64> = u
                .iter()
                .map(|m| {
                    let e: f64 = rng.sample(StandardNormal);
                    m + spread * e
                })
                .collect();
            columns.push(col);
            labels.push(c);
        }
    }
    LabeledDataset::new(DenseMatrix::from_columns(&columns)?, labels, classes)
}
