//! Classification layer: residual rules, fusion operators and the method
//! pipelines.
//!
//! Every method codes a unit-norm test sample over the dictionary, turns the
//! code into one residual per class and predicts the class with the smallest
//! residual (ties go to the lowest index).

mod fusion;
mod method;
mod residuals;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm2, LinalgError};
use crate::solvers::{
    ccrc_operator, lrc_fit, nnls, ridge_operator, AlmSolver, Coefficients, FistaSolver, LinearOperator,
    PartitionedDictionary, SolverError,
};

pub use fusion::{fuse_multiply, fuse_residual_weighted, fuse_sum_normalize};
pub use method::{Method, MethodConfig, ParseMethodError};
pub use residuals::{argmin_class, class_residuals_plain, class_residuals_regularized, ClassResiduals};

/// Coefficient norms below this make a class slice count as zero.
pub const DEGENERATE_SLICE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("every class has a numerically zero coefficient slice")]
    AllClassesDegenerate,
    #[error("fused coefficient vector is numerically zero")]
    ZeroFusion,
    #[error("invalid method configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

impl From<LinalgError> for ClassifyError {
    fn from(e: LinalgError) -> Self {
        ClassifyError::Solver(e.into())
    }
}

/// Outcome of classifying one test sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class_index: usize,
    pub residuals: ClassResiduals,
    /// The coefficient vector the decision was made from. For FRC, which
    /// fuses residuals rather than codes, this is the sparse code.
    pub coefficients: Coefficients,
    /// Wall-clock seconds spent inside the per-sample pipeline.
    pub solve_time: f64,
    /// False when an iterative solver hit its budget and its last iterate was used.
    pub converged: bool,
}

/// Dictionary-dependent state for one method, built once and reused for
/// every test sample. Shareable across threads.
#[derive(Debug)]
pub struct PreparedClassifier<'a> {
    dict: &'a PartitionedDictionary,
    cfg: MethodConfig,
    fista: Option<FistaSolver>,
    ridge: Option<LinearOperator>,
    ccrc: Option<LinearOperator>,
    alm: Option<AlmSolver>,
}

impl<'a> PreparedClassifier<'a> {
    pub fn new(dict: &'a PartitionedDictionary, cfg: &MethodConfig) -> Result<Self, ClassifyError> {
        cfg.validate()?;
        let m = cfg.method;
        let fista = m.uses_l1().then(|| FistaSolver::new(dict.atoms())).transpose()?;
        let ridge = m.uses_ridge().then(|| ridge_operator(dict, cfg.lambda)).transpose()?;
        let ccrc = matches!(m, Method::Ccrc | Method::Sccrc)
            .then(|| ccrc_operator(dict, cfg.lambda1, cfg.lambda2))
            .transpose()?;
        let alm = (m == Method::CcrcL1).then(|| AlmSolver::new(dict, cfg.lambda2, cfg.alm)).transpose()?;
        Ok(Self { dict, cfg: cfg.clone(), fista, ridge, ccrc, alm })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &PartitionedDictionary {
        self.dict
    }

    pub fn predict(&self, y: &[f64]) -> Result<Prediction, ClassifyError> {
        let d = self.dict;
        if y.len() != d.dim() {
            return Err(ClassifyError::LengthMismatch { expected: d.dim(), got: y.len() });
        }
        let start = Instant::now();
        let n = norm2(y);
        let y: Vec<f64> = if n > 0.0 && (n - 1.0).abs() > 1e-12 {
            if (n - 1.0).abs() > 1e-6 {
                log::warn!("normalizing test sample with l2-norm {n:.6}");
            }
            y.iter().map(|v| v / n).collect()
        } else {
            y.to_vec()
        };
        let mut converged = true;
        let (residuals, coefficients) = self.run(&y, &mut converged)?;
        let class_index = argmin_class(&residuals);
        Ok(Prediction { class_index, residuals, coefficients, solve_time: start.elapsed().as_secs_f64(), converged })
    }

    fn sparse_code(&self, y: &[f64], converged: &mut bool) -> Result<Coefficients, ClassifyError> {
        let solver = self.fista.as_ref().expect("l1 solver prepared");
        match solver.solve(y, self.cfg.lambda, &self.cfg.fista) {
            Ok(s) => Ok(s.coefficients),
            Err(e) => self.recover(e, converged),
        }
    }

    fn recover(&self, e: SolverError, converged: &mut bool) -> Result<Coefficients, ClassifyError> {
        match e {
            SolverError::NonConvergence { iterate, iterations } if !self.cfg.fatal_nonconvergence => {
                log::debug!("{}: using last iterate after {iterations} iterations", self.cfg.method);
                *converged = false;
                Ok(Coefficients::new(iterate))
            }
            e => Err(e.into()),
        }
    }

    fn run(&self, y: &[f64], converged: &mut bool) -> Result<(ClassResiduals, Coefficients), ClassifyError> {
        let d = self.dict;
        let ridge = || self.ridge.as_ref().expect("ridge operator prepared").apply(y);
        let ccrc = || self.ccrc.as_ref().expect("ccrc operator prepared").apply(y);
        let out = match self.cfg.method {
            Method::Src => {
                let a = self.sparse_code(y, converged)?;
                (class_residuals_plain(d, &a, y)?, a)
            }
            Method::Crc => {
                let a = ridge()?;
                (class_residuals_regularized(d, &a, y)?, a)
            }
            Method::Lrc => self.lrc(y)?,
            Method::Ccrc => {
                let b = ccrc()?;
                (class_residuals_regularized(d, &b, y)?, b)
            }
            Method::CcrcL1 => {
                let solver = self.alm.as_ref().expect("alm solver prepared");
                let z = match solver.solve(y, self.cfg.lambda1) {
                    Ok(s) => s.coefficients,
                    Err(e) => self.recover(e, converged)?,
                };
                (class_residuals_plain(d, &z, y)?, z)
            }
            Method::Nrc => {
                let a = match nnls(d.atoms(), y) {
                    Ok(a) => a,
                    Err(e) => self.recover(e, converged)?,
                };
                (class_residuals_plain(d, &a, y)?, a)
            }
            Method::Scrc => {
                let f = fuse_multiply(&self.sparse_code(y, converged)?, &ridge()?)?;
                (class_residuals_plain(d, &f, y)?, f)
            }
            Method::SaCrc => {
                let f = fuse_sum_normalize(&self.sparse_code(y, converged)?, &ridge()?)?;
                (class_residuals_plain(d, &f, y)?, f)
            }
            Method::Frc => {
                let a = self.sparse_code(y, converged)?;
                let r_sparse = class_residuals_plain(d, &a, y)?;
                let r_collab = class_residuals_plain(d, &ridge()?, y)?;
                (fuse_residual_weighted(&r_sparse, &r_collab, self.cfg.theta)?, a)
            }
            Method::Sccrc => {
                let f = fuse_multiply(&self.sparse_code(y, converged)?, &ccrc()?)?;
                (class_residuals_plain(d, &f, y)?, f)
            }
        };
        Ok(out)
    }

    fn lrc(&self, y: &[f64]) -> Result<(ClassResiduals, Coefficients), ClassifyError> {
        let d = self.dict;
        let mut coeffs = vec![0.0; d.n_atoms()];
        let mut residuals = Vec::with_capacity(d.n_classes());
        for c in 0..d.n_classes() {
            match lrc_fit(c, &d.class_block(c), y) {
                Ok(a) => {
                    let recon = d.class_reconstruction(c, &a);
                    let r: Vec<f64> = y.iter().zip(&recon).map(|(p, q)| p - q).collect();
                    residuals.push(norm2(&r));
                    coeffs[d.class_range(c)].copy_from_slice(&a);
                }
                Err(SolverError::RankDeficientClass { class, condition }) => {
                    log::debug!("LRC: class {class} rank deficient (condition {condition:e})");
                    residuals.push(f64::INFINITY);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok((ClassResiduals::new(residuals)?, Coefficients::new(coeffs)))
    }
}

/// One-shot classification. Builds the method's operators for `d` and then
/// classifies `y`; use [`PreparedClassifier`] to amortize the setup.
pub fn classify(d: &PartitionedDictionary, y: &[f64], cfg: &MethodConfig) -> Result<Prediction, ClassifyError> {
    PreparedClassifier::new(d, cfg)?.predict(y)
}
