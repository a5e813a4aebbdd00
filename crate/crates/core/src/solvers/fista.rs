//! Monotone FISTA with momentum restart for `min ‖y − Xα‖₂² + λ‖α‖₁`.

use crate::linalg::{dot, max_eigenvalue, norm1, DenseMatrix};

use super::{
    check_len, check_positive, warn_if_not_unit, Coefficients, PartitionedDictionary, SolverError, SolverOptions,
};

/// `‖y − Xα‖₂² + λ‖α‖₁`
pub fn l1_objective(x: &DenseMatrix, y: &[f64], alpha: &[f64], lambda: f64) -> f64 {
    let r: Vec<f64> = x.matvec(alpha).iter().zip(y).map(|(p, q)| q - p).collect();
    dot(&r, &r) + lambda * norm1(alpha)
}

#[derive(Debug, Clone)]
pub struct FistaSolution {
    pub coefficients: Coefficients,
    pub iterations: usize,
    /// Objective after every accepted iterate, starting with the value at zero.
    pub objective_trace: Vec<f64>,
}

/// Dictionary-dependent part of the problem: the Gram matrix and the
/// Lipschitz constant `L = λ_max(2XᵀX)` of the smooth term's gradient.
#[derive(Debug, Clone)]
pub struct FistaSolver {
    atoms: DenseMatrix,
    gram: DenseMatrix,
    lipschitz: f64,
}

impl FistaSolver {
    pub fn new(x: &DenseMatrix) -> Result<Self, SolverError> {
        let gram = x.gram();
        let lipschitz = max_eigenvalue(&gram.scaled(2.0))?;
        Ok(Self { atoms: x.clone(), gram, lipschitz })
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn solve(&self, y: &[f64], lambda: f64, opts: &SolverOptions) -> Result<FistaSolution, SolverError> {
        check_positive("lambda", lambda)?;
        check_len(self.atoms.rows(), y.len())?;
        if opts.max_iter == 0 || !(opts.tol > 0.0) {
            return Err(SolverError::InvalidParameter("fista needs max_iter > 0 and tol > 0".into()));
        }
        let n = self.atoms.cols();
        let yy = dot(y, y);
        if yy == 0.0 || self.lipschitz == 0.0 {
            return Ok(FistaSolution {
                coefficients: Coefficients::zeros(n),
                iterations: 0,
                objective_trace: vec![yy],
            });
        }
        let xty = self.atoms.t_matvec(y);
        let step = 1.0 / self.lipschitz;
        let thresh = lambda * step;

        // F(α) = αᵀGα − 2αᵀb + yᵀy + λ‖α‖₁, evaluated through the Gram matrix
        let objective = |a: &[f64], ga: &[f64]| dot(a, ga) - 2.0 * dot(a, &xty) + yy + lambda * norm1(a);
        // prox-gradient step from `from` with gradient 2(G·from − b)
        let prox_step = |from: &[f64], g_from: &[f64]| -> Vec<f64> {
            from.iter()
                .zip(g_from)
                .zip(&xty)
                .map(|((&v, &gv), &b)| crate::linalg::soft_threshold(v - step * 2.0 * (gv - b), thresh))
                .collect()
        };

        let mut x = vec![0.0; n];
        let mut gx = vec![0.0; n];
        let mut fx = yy;
        let mut z = x.clone();
        let mut gz = gx.clone();
        let mut t = 1.0f64;
        let mut trace = vec![fx];

        for iter in 1..=opts.max_iter {
            let mut cand = prox_step(&z, &gz);
            let mut g_cand = self.gram.matvec(&cand);
            let mut f_cand = objective(&cand, &g_cand);
            if f_cand > fx {
                // restart: drop momentum and take a plain proximal step from x
                t = 1.0;
                cand = prox_step(&x, &gx);
                g_cand = self.gram.matvec(&cand);
                f_cand = objective(&cand, &g_cand);
                if f_cand > fx {
                    // rounding only; keep the current iterate
                    cand = x.clone();
                    g_cand = gx.clone();
                    f_cand = fx;
                }
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            z = cand.iter().zip(&x).map(|(c, p)| c + beta * (c - p)).collect();
            gz = g_cand.iter().zip(&gx).map(|(c, p)| c + beta * (c - p)).collect();
            t = t_next;

            let decrease = fx - f_cand;
            x = cand;
            gx = g_cand;
            fx = f_cand;
            trace.push(fx);
            // relative decrease (F_{k-1} − F_k)/F_k
            if decrease <= opts.tol * fx.abs() && iter > 1 {
                return Ok(FistaSolution {
                    coefficients: Coefficients::new(x),
                    iterations: iter,
                    objective_trace: trace,
                });
            }
        }
        Err(SolverError::NonConvergence { iterate: x, iterations: opts.max_iter })
    }
}

/// Solves the l1 problem on a bare matrix.
pub fn fista_l1_matrix(
    x: &DenseMatrix,
    y: &[f64],
    lambda: f64,
    opts: &SolverOptions,
) -> Result<FistaSolution, SolverError> {
    FistaSolver::new(x)?.solve(y, lambda, opts)
}

/// `argmin ‖y − Xα‖₂² + λ‖α‖₁` over the dictionary atoms.
pub fn fista_l1(
    d: &PartitionedDictionary,
    y: &[f64],
    lambda: f64,
    opts: &SolverOptions,
) -> Result<Coefficients, SolverError> {
    warn_if_not_unit(y);
    fista_l1_matrix(d.atoms(), y, lambda, opts).map(|s| s.coefficients)
}
