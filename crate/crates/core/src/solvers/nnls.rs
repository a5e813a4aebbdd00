//! Active-set non-negative least squares (Lawson–Hanson).

use crate::linalg::{lstsq_qr, DenseMatrix};

use super::{check_len, Coefficients, SolverError};

/// Entries at or below this are moved back to the zero set.
pub const NNLS_ANTI_CYCLING_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// `argmin ‖y − Xα‖₂²  s.t.  α ≥ 0`, with the default outer budget `5n + 10`.
pub fn nnls(x: &DenseMatrix, y: &[f64]) -> Result<Coefficients, SolverError> {
    nnls_with(x, y, 5 * x.cols() + 10)
}

pub fn nnls_with(x: &DenseMatrix, y: &[f64], max_outer: usize) -> Result<Coefficients, SolverError> {
    check_len(x.rows(), y.len())?;
    let n = x.cols();
    let mut alpha = vec![0.0; n];
    if y.iter().all(|&v| v == 0.0) {
        return Ok(Coefficients::new(alpha));
    }
    let mut passive = vec![false; n];
    // columns that failed to enter since the last change of α
    let mut blocked = vec![false; n];

    let dual = |alpha: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = x.matvec(alpha).iter().zip(y).map(|(p, q)| q - p).collect();
        x.t_matvec(&r)
    };

    for _ in 0..max_outer {
        let w = dual(&alpha);
        let scale = 1.0 + w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let entering =
            (0..n).filter(|&j| !passive[j] && !blocked[j]).max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)));
        let Some(t) = entering.filter(|&t| w[t] > DUAL_TOL * scale) else {
            return Ok(Coefficients::new(alpha));
        };
        passive[t] = true;

        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = x.select_columns(&idx);
            let s = lstsq_qr(&sub, y, RANK_TOL);
            let s = match s {
                Some(s) if !(first && s[idx.iter().position(|&j| j == t).unwrap()] <= 0.0) => s,
                _ if first => {
                    // the entering column cannot improve the fit; skip it
                    passive[t] = false;
                    blocked[t] = true;
                    break;
                }
                _ => {
                    return Err(SolverError::NonConvergence { iterate: alpha, iterations: max_outer });
                }
            };
            first = false;
            if s.iter().all(|&v| v > NNLS_ANTI_CYCLING_TOL) {
                for (k, &j) in idx.iter().enumerate() {
                    alpha[j] = s[k];
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            // step toward s until the first passive entry hits zero
            let mut step = 1.0f64;
            for (k, &j) in idx.iter().enumerate() {
                if s[k] <= NNLS_ANTI_CYCLING_TOL {
                    let denom = alpha[j] - s[k];
                    if denom > 0.0 {
                        step = step.min(alpha[j] / denom);
                    } else {
                        step = 0.0;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                alpha[j] += step * (s[k] - alpha[j]);
                if alpha[j] <= NNLS_ANTI_CYCLING_TOL {
                    alpha[j] = 0.0;
                    passive[j] = false;
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(SolverError::NonConvergence { iterate: alpha, iterations: max_outer })
}
