//! Coefficient solvers shared by the classifiers.

mod alm;
mod dictionary;
mod fista;
mod lrc;
mod nnls;
mod operators;

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::LinalgError;

pub use alm::{alm_ccrc_l1, AlmSolution, AlmSolver};

pub use dictionary::PartitionedDictionary;
pub use fista::{fista_l1, fista_l1_matrix, l1_objective, FistaSolution, FistaSolver};
pub use lrc::{lrc_fit, LRC_CONDITION_LIMIT};
pub use nnls::{nnls, nnls_with, NNLS_ANTI_CYCLING_TOL};
pub use operators::{ccrc_objective_gradient, ccrc_operator, ridge_operator, LinearOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid class partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterate: Vec<f64>, iterations: usize },
    #[error("class {class} is rank deficient (condition estimate {condition:e})")]
    RankDeficientClass { class: usize, condition: f64 },
}

impl SolverError {
    /// Last iterate carried by a non-convergence error.
    pub fn last_iterate(&self) -> Option<&[f64]> {
        match self {
            SolverError::NonConvergence { iterate, .. } => Some(iterate),
            _ => None,
        }
    }
}

/// Representation vector aligned to dictionary columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices with `|c_j| >= threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, v)| v.abs() >= threshold).map(|(j, _)| j).collect()
    }
}

impl Deref for Coefficients {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Coefficients {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Iteration controls. The ALM fields are only read by [`alm_ccrc_l1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    pub eps: f64,
    /// ALM dual-residual tolerance, used by [`PenaltyRule::Balanced`].
    #[serde(default = "default_dual_eps")]
    pub dual_eps: f64,
    /// How the ALM penalty `μ` evolves between sweeps.
    #[serde(default)]
    pub penalty: PenaltyRule,
}

/// Penalty update of the ALM solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyRule {
    /// `μ ← min(ρμ, μ_max)` every sweep; stop on `‖β − z‖∞ < ε` alone.
    Geometric,
    /// Multiply or divide `μ` by `ρ` when one of the primal residual
    /// `‖β − z‖∞` and dual residual `μ‖z − z_prev‖∞` exceeds twice the other
    /// (capped at `μ_max`); stop when the primal residual is below `eps` and
    /// the dual residual below `dual_eps`.
    #[default]
    Balanced,
}

fn default_dual_eps() -> f64 {
    1e-4
}

impl SolverOptions {
    /// FISTA defaults: 1000 iterations, relative objective tolerance 1e-8.
    pub fn fista() -> Self {
        Self { max_iter: 1000, tol: 1e-8, ..Self::alm() }
    }

    /// ALM defaults: `mu = 0.5`, `mu_max = 1e6`, `rho = 1.1`, `eps = 1e-3`, 2000 iterations.
    pub fn alm() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-8,
            mu0: 0.5,
            mu_max: 1e6,
            rho: 1.1,
            eps: 1e-3,
            dual_eps: 1e-4,
            penalty: PenaltyRule::Balanced,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iter == 0 {
            return Err(SolverError::InvalidParameter("max_iter must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.rho > 1.0) {
            return Err(SolverError::InvalidParameter(format!("rho must be > 1, got {}", self.rho)));
        }
        if !(self.mu0 > 0.0 && self.mu0 < self.mu_max) {
            return Err(SolverError::InvalidParameter(format!(
                "need 0 < mu0 < mu_max, got mu0={} mu_max={}",
                self.mu0, self.mu_max
            )));
        }
        if !(self.eps > 0.0 && self.dual_eps > 0.0) {
            return Err(SolverError::InvalidParameter(format!(
                "eps and dual_eps must be > 0, got {} and {}",
                self.eps, self.dual_eps
            )));
        }
        Ok(())
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::fista()
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<(), SolverError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

pub(crate) fn check_nonnegative(name: &str, v: f64) -> Result<(), SolverError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidParameter(format!("{name} must be >= 0, got {v}")))
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<(), SolverError> {
    if expected == got {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch(format!("expected length {expected}, got {got}")).into())
    }
}

pub(crate) fn warn_if_not_unit(y: &[f64]) {
    let n = crate::linalg::norm2(y);
    if n > 0.0 && (n - 1.0).abs() > 1e-6 {
        log::warn!("test sample has l2-norm {n:.6}, expected unit norm");
    }
}
