//! Shared helpers and independent oracles for unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{dot, normalized, soft_threshold, DenseMatrix};
use crate::solvers::PartitionedDictionary;

pub fn random_dictionary(rng: &mut ChaCha8Rng, dim: usize, sizes: &[usize]) -> PartitionedDictionary {
    let n: usize = sizes.iter().sum();
    let x = DenseMatrix::from_fn(dim, n, |_, _| rng.random_range(-1.0..1.0));
    PartitionedDictionary::new(&x, sizes.to_vec()).unwrap()
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalized(&v).unwrap()
}

/// Cyclic coordinate descent for `‖y − Xα‖² + λ‖α‖₁`, run until no
/// coordinate moves more than `tol`.
pub fn coordinate_descent_lasso(x: &DenseMatrix, y: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let n = x.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)).collect();
    let sq: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    let mut alpha = vec![0.0; n];
    let mut r = y.to_vec();
    for _ in 0..1_000_000 {
        let mut max_move = 0.0f64;
        for j in 0..n {
            let rho = dot(&cols[j], &r) + sq[j] * alpha[j];
            let new = soft_threshold(rho, lambda / 2.0) / sq[j];
            let delta = new - alpha[j];
            if delta != 0.0 {
                for (ri, cij) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * cij;
                }
                alpha[j] = new;
            }
            max_move = max_move.max(delta.abs());
        }
        if max_move < tol {
            break;
        }
    }
    alpha
}
