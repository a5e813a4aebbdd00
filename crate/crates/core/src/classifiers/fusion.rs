use crate::linalg::norm2;
use crate::solvers::Coefficients;

use super::{ClassResiduals, ClassifyError};

/// Fused vectors with an l2-norm below this are rejected.
pub const ZERO_FUSION_TOL: f64 = 1e-12;

fn same_len(a: usize, b: usize) -> Result<(), ClassifyError> {
    if a == b {
        Ok(())
    } else {
        Err(ClassifyError::LengthMismatch { expected: a, got: b })
    }
}

/// Elementwise product `a ⊙ b`.
pub fn fuse_multiply(a: &[f64], b: &[f64]) -> Result<Coefficients, ClassifyError> {
    same_len(a.len(), b.len())?;
    Ok(Coefficients::new(a.iter().zip(b).map(|(x, y)| x * y).collect()))
}

/// `(a + b) / ‖a + b‖₂`
pub fn fuse_sum_normalize(a: &[f64], b: &[f64]) -> Result<Coefficients, ClassifyError> {
    same_len(a.len(), b.len())?;
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let n = norm2(&sum);
    if n < ZERO_FUSION_TOL {
        return Err(ClassifyError::ZeroFusion);
    }
    Ok(Coefficients::new(sum.into_iter().map(|v| v / n).collect()))
}

/// `(1 − θ)·r_sparse + θ·r_collab`, per class.
pub fn fuse_residual_weighted(
    r_sparse: &ClassResiduals,
    r_collab: &ClassResiduals,
    theta: f64,
) -> Result<ClassResiduals, ClassifyError> {
    same_len(r_sparse.len(), r_collab.len())?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(ClassifyError::InvalidConfig(format!("theta must lie in [0, 1], got {theta}")));
    }
    let values = r_sparse
        .values()
        .iter()
        .zip(r_collab.values())
        .map(|(&s, &c)| {
            // keep the endpoints exact, including infinite entries
            if theta == 0.0 {
                s
            } else if theta == 1.0 {
                c
            } else {
                (1.0 - theta) * s + theta * c
            }
        })
        .collect();
    ClassResiduals::new(values)
}
