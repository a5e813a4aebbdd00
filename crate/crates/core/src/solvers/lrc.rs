use crate::linalg::{Cholesky, DenseMatrix, LinalgError};

use super::{check_len, Coefficients, SolverError};

/// Gram matrices with a condition estimate at or above this are rejected.
pub const LRC_CONDITION_LIMIT: f64 = 1e12;

/// Class-wise least squares `(X_iᵀX_i)⁻¹X_iᵀy`.
///
/// The condition estimate is the squared ratio of the extreme Cholesky pivots.
pub fn lrc_fit(class: usize, xi: &DenseMatrix, y: &[f64]) -> Result<Coefficients, SolverError> {
    check_len(xi.rows(), y.len())?;
    let gram = xi.gram();
    let chol = match Cholesky::factor(&gram) {
        Ok(c) => c,
        Err(LinalgError::FactorizationFailure { .. }) => {
            return Err(SolverError::RankDeficientClass { class, condition: f64::INFINITY })
        }
        Err(e) => return Err(e.into()),
    };
    let condition = chol.condition_estimate();
    if !(condition < LRC_CONDITION_LIMIT) {
        return Err(SolverError::RankDeficientClass { class, condition });
    }
    Ok(Coefficients::new(chol.solve(&xi.t_matvec(y))))
}
