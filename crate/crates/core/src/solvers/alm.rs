//! Augmented Lagrangian solver for the l1-regularized collaborative-competitive
//! objective
//!
//! ```text
//! min_β ‖y − Xβ‖² + λ₁‖β‖₁ + λ₂ Σ_i ‖y − X_iβ_i‖²
//! ```
//!
//! split as `β = z`. Each sweep solves the smooth part for `β` in closed form,
//! soft-thresholds for `z`, takes a multiplier step and grows the penalty `μ`
//! geometrically until `μ_max`.

use std::sync::OnceLock;

use crate::linalg::{soft_threshold, Cholesky, DenseMatrix};

use super::{
    check_len, check_nonnegative, check_positive, warn_if_not_unit, Coefficients, PartitionedDictionary, PenaltyRule,
    SolverError, SolverOptions,
};

#[derive(Debug, Clone)]
pub struct AlmSolution {
    /// The sparse split variable `z`.
    pub coefficients: Coefficients,
    /// The smooth iterate `β` from the final sweep.
    pub beta: Vec<f64>,
    pub iterations: usize,
    /// `‖β − z‖∞` at termination.
    pub primal_residual: f64,
}

/// Dictionary and `λ₂`-dependent state, shareable across test samples.
///
/// The β-system `XᵀX + λ₂M + (μ/2)I` depends on the sweep only through `μ`.
/// Every reachable `μ` has the form `min(μ₀ρᵏ, μ_max)` for an integer `k`, so
/// each factorization is computed once on first use and cached by `k`.
#[derive(Debug)]
pub struct AlmSolver {
    atoms: DenseMatrix,
    system: DenseMatrix,
    rhs_scale: f64,
    opts: SolverOptions,
    // exponent at which μ₀ρᵏ first reaches μ_max
    k_max: i32,
    factors: Vec<OnceLock<Result<Cholesky, SolverError>>>,
}

/// Lowest penalty exponent reachable by [`PenaltyRule::Balanced`].
const K_MIN: i32 = -200;
/// Residual ratio that triggers a penalty change under [`PenaltyRule::Balanced`].
const BALANCE_RATIO: f64 = 2.0;

impl AlmSolver {
    pub fn new(d: &PartitionedDictionary, lambda2: f64, opts: SolverOptions) -> Result<Self, SolverError> {
        check_nonnegative("lambda2", lambda2)?;
        opts.validate()?;
        let x = d.atoms();
        let gram = x.gram();
        let m = d.competitive_block(&gram);
        let n = gram.rows();
        let system = DenseMatrix::from_fn(n, n, |i, j| gram[(i, j)] + lambda2 * m[(i, j)]);
        let k_max = ((opts.mu_max / opts.mu0).ln() / opts.rho.ln()).ceil() as i32;
        let factors = (K_MIN..=k_max).map(|_| OnceLock::new()).collect();
        Ok(Self { atoms: x.clone(), system, rhs_scale: 1.0 + lambda2, opts, k_max, factors })
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    fn mu(&self, k: i32) -> f64 {
        (self.opts.mu0 * self.opts.rho.powi(k)).min(self.opts.mu_max)
    }

    fn factor(&self, k: i32) -> Result<&Cholesky, SolverError> {
        self.factors[(k - K_MIN) as usize]
            .get_or_init(|| {
                let mut a = self.system.clone();
                a.add_diagonal(0.5 * self.mu(k));
                Cholesky::factor(&a).map_err(SolverError::from)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn solve(&self, y: &[f64], lambda1: f64) -> Result<AlmSolution, SolverError> {
        check_positive("lambda1", lambda1)?;
        check_len(self.atoms.rows(), y.len())?;
        let n = self.atoms.cols();
        if y.iter().all(|&v| v == 0.0) {
            return Ok(AlmSolution {
                coefficients: Coefficients::zeros(n),
                beta: vec![0.0; n],
                iterations: 0,
                primal_residual: 0.0,
            });
        }
        let base_rhs: Vec<f64> = self.atoms.t_matvec(y).into_iter().map(|v| self.rhs_scale * v).collect();
        let eps = self.opts.eps;

        let mut z = vec![0.0; n];
        let mut z_prev = vec![0.0; n];
        let mut theta = vec![0.0; n];
        let mut beta = vec![0.0; n];
        let mut k = 0i32;
        for iter in 0..self.opts.max_iter {
            let mu = self.mu(k);
            // β = (XᵀX + λ₂M + μ/2·I)⁻¹ ((1+λ₂)Xᵀy + (μz − θ)/2)
            for j in 0..n {
                beta[j] = base_rhs[j] + 0.5 * (mu * z[j] - theta[j]);
            }
            self.factor(k)?.solve_in_place(&mut beta);
            // z = soft(β + θ/μ, λ₁/μ)
            let t = lambda1 / mu;
            z_prev.copy_from_slice(&z);
            for j in 0..n {
                z[j] = soft_threshold(beta[j] + theta[j] / mu, t);
            }
            let mut primal = 0.0f64;
            let mut dual = 0.0f64;
            for j in 0..n {
                let diff = beta[j] - z[j];
                theta[j] += mu * diff;
                primal = primal.max(diff.abs());
                dual = dual.max(mu * (z[j] - z_prev[j]).abs());
            }
            let converged = match self.opts.penalty {
                PenaltyRule::Geometric => {
                    k = (k + 1).min(self.k_max);
                    primal < eps
                }
                PenaltyRule::Balanced => {
                    if primal > BALANCE_RATIO * dual {
                        k = (k + 1).min(self.k_max);
                    } else if dual > BALANCE_RATIO * primal {
                        k = (k - 1).max(K_MIN);
                    }
                    primal < eps && dual < self.opts.dual_eps
                }
            };
            if converged {
                return Ok(AlmSolution {
                    coefficients: Coefficients::new(z),
                    beta,
                    iterations: iter + 1,
                    primal_residual: primal,
                });
            }
        }
        Err(SolverError::NonConvergence { iterate: z, iterations: self.opts.max_iter })
    }
}

/// Convenience wrapper building a fresh [`AlmSolver`]; returns the sparse `z`.
pub fn alm_ccrc_l1(
    d: &PartitionedDictionary,
    y: &[f64],
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
) -> Result<Coefficients, SolverError> {
    warn_if_not_unit(y);
    AlmSolver::new(d, lambda2, *opts)?.solve(y, lambda1).map(|s| s.coefficients)
}
