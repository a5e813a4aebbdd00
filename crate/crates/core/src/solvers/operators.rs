//! Closed-form collaborative (ridge) and collaborative-competitive operators.

use crate::linalg::{solve_spd, DenseMatrix};

use super::{check_len, check_nonnegative, check_positive, Coefficients, PartitionedDictionary, SolverError};

/// Precomputed `P` (n×d) such that `coefficients = P·y`.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    p: DenseMatrix,
}

impl LinearOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn apply(&self, y: &[f64]) -> Result<Coefficients, SolverError> {
        check_len(self.p.cols(), y.len())?;
        Ok(Coefficients::new(self.p.matvec(y)))
    }
}

/// `P = (XᵀX + λI)⁻¹Xᵀ`
pub fn ridge_operator(d: &PartitionedDictionary, lambda: f64) -> Result<LinearOperator, SolverError> {
    check_positive("lambda", lambda)?;
    let x = d.atoms();
    let mut system = x.gram();
    system.add_diagonal(lambda);
    let p = solve_spd(&system, &x.transpose())?;
    Ok(LinearOperator { p })
}

/// `P = (1 + λ₂)(XᵀX + λ₁I + λ₂M)⁻¹Xᵀ` with `M = diag(X_1ᵀX_1, …, X_CᵀX_C)`.
pub fn ccrc_operator(d: &PartitionedDictionary, lambda1: f64, lambda2: f64) -> Result<LinearOperator, SolverError> {
    check_positive("lambda1", lambda1)?;
    check_nonnegative("lambda2", lambda2)?;
    let x = d.atoms();
    let gram = x.gram();
    let m = d.competitive_block(&gram);
    let n = gram.rows();
    let mut system = DenseMatrix::from_fn(n, n, |i, j| gram[(i, j)] + lambda2 * m[(i, j)]);
    system.add_diagonal(lambda1);
    let p = solve_spd(&system, &x.transpose())?.scaled(1.0 + lambda2);
    Ok(LinearOperator { p })
}

/// Gradient of `‖y − Xβ‖² + λ₁‖β‖² + λ₂ Σ_i ‖y − X_iβ_i‖²` at `β`, computed
/// term by term without forming `M`.
pub fn ccrc_objective_gradient(
    d: &PartitionedDictionary,
    y: &[f64],
    beta: &[f64],
    lambda1: f64,
    lambda2: f64,
) -> Vec<f64> {
    let x = d.atoms();
    let resid: Vec<f64> = x.matvec(beta).iter().zip(y).map(|(p, q)| p - q).collect();
    let mut grad: Vec<f64> = x.t_matvec(&resid).iter().zip(beta).map(|(g, b)| 2.0 * g + 2.0 * lambda1 * b).collect();
    for c in 0..d.n_classes() {
        let r = d.class_range(c);
        let recon = d.class_reconstruction(c, &beta[r.clone()]);
        let class_resid: Vec<f64> = recon.iter().zip(y).map(|(p, q)| p - q).collect();
        for j in r {
            let col_dot: f64 = (0..x.rows()).map(|i| x[(i, j)] * class_resid[i]).sum();
            grad[j] += 2.0 * lambda2 * col_dot;
        }
    }
    grad
}
