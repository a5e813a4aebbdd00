//! Independent reference implementations used as test oracles. None of them
//! calls into the solver code they check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbcm::{DenseMatrix, PartitionedDictionary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform(-1, 1) entries, columns grouped by `sizes`.
pub fn random_dictionary(rng: &mut ChaCha8Rng, dim: usize, sizes: &[usize]) -> PartitionedDictionary {
    let n: usize = sizes.iter().sum();
    let x = DenseMatrix::from_fn(dim, n, |_, _| rng.random_range(-1.0..1.0));
    PartitionedDictionary::new(&x, sizes.to_vec()).unwrap()
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

fn col(x: &DenseMatrix, j: usize) -> Vec<f64> {
    (0..x.rows()).map(|i| x[(i, j)]).collect()
}

fn residual(x: &DenseMatrix, y: &[f64], a: &[f64]) -> Vec<f64> {
    (0..x.rows()).map(|i| y[i] - (0..x.cols()).map(|j| x[(i, j)] * a[j]).sum::<f64>()).collect()
}

/// `‖y − Xa‖² + λ‖a‖₁`, written out directly.
pub fn lasso_objective(x: &DenseMatrix, y: &[f64], a: &[f64], lambda: f64) -> f64 {
    let r = residual(x, y, a);
    r.iter().map(|v| v * v).sum::<f64>() + lambda * a.iter().map(|v| v.abs()).sum::<f64>()
}

/// Cyclic coordinate descent for `‖y − Xa‖² + λ‖a‖₁`, until no coordinate moves by more than `tol`.
pub fn coordinate_descent_lasso(x: &DenseMatrix, y: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let n = x.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| col(x, j)).collect();
    let sq: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut a = vec![0.0; n];
    let mut r = y.to_vec();
    for _ in 0..1_000_000 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let rho: f64 = cols[j].iter().zip(&r).map(|(c, v)| c * v).sum::<f64>() + sq[j] * a[j];
            let t = lambda / 2.0;
            let new = if rho > t {
                (rho - t) / sq[j]
            } else if rho < -t {
                (rho + t) / sq[j]
            } else {
                0.0
            };
            let delta = new - a[j];
            if delta != 0.0 {
                for (ri, ci) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * ci;
                }
                a[j] = new;
            }
            moved = moved.max(delta.abs());
        }
        if moved < tol {
            break;
        }
    }
    a
}

fn spectral_norm_sq(x: &DenseMatrix) -> f64 {
    // power iteration on XᵀX from a fixed random start
    let mut g = rng(0xfeed);
    let mut v: Vec<f64> = (0..x.cols()).map(|_| g.random_range(0.5..1.5)).collect();
    let mut est = 0.0;
    for _ in 0..10_000 {
        let xv: Vec<f64> = (0..x.rows()).map(|i| (0..x.cols()).map(|j| x[(i, j)] * v[j]).sum()).collect();
        let w: Vec<f64> = (0..x.cols()).map(|j| (0..x.rows()).map(|i| x[(i, j)] * xv[i]).sum()).collect();
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        est = n / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = w.into_iter().map(|a| a / n).collect();
    }
    est
}

/// Accelerated projected gradient for `min ½‖y − Xa‖²` over `a ≥ 0`, a fixed number of steps.
pub fn projected_gradient_nnls(x: &DenseMatrix, y: &[f64], steps: usize) -> Vec<f64> {
    let n = x.cols();
    let step = 1.0 / spectral_norm_sq(x);
    let grad = |a: &[f64]| -> Vec<f64> {
        let r = residual(x, y, a);
        (0..n).map(|j| -(0..x.rows()).map(|i| x[(i, j)] * r[i]).sum::<f64>()).collect()
    };
    let f = |a: &[f64]| residual(x, y, a).iter().map(|v| v * v).sum::<f64>();
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..steps {
        let g = grad(&z);
        let next: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| (zi - step * gi).max(0.0)).collect();
        if f(&next) > f(&a) {
            // restart momentum
            t = 1.0;
            z = a.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next.iter().zip(&a).map(|(p, q)| p + (t - 1.0) / t_next * (p - q)).collect();
        a = next;
        t = t_next;
    }
    a
}

/// Largest violation of the NNLS optimality conditions at `a`:
/// `a ≥ 0`, `g = Xᵀ(Xa − y) ≥ 0`, `a_j g_j = 0`.
pub fn nnls_kkt_violation(x: &DenseMatrix, y: &[f64], a: &[f64]) -> f64 {
    let r = residual(x, y, a);
    let mut worst = 0.0f64;
    for j in 0..x.cols() {
        let g: f64 = -(0..x.rows()).map(|i| x[(i, j)] * r[i]).sum::<f64>();
        worst = worst.max((-a[j]).max(0.0)).max((-g).max(0.0)).max((a[j] * g).abs());
    }
    worst
}

/// `2^{-m}·2·Σ_{j≤k} C(m, j)` with exact integer binomials, `m ≤ 120`.
pub fn binomial_two_sided(n01: u32, n10: u32) -> f64 {
    let m = n01 + n10;
    if m == 0 {
        return 1.0;
    }
    let k = n01.min(n10);
    let mut c: u128 = 1;
    let mut sum: u128 = 0;
    for j in 0..=k {
        if j > 0 {
            c = c * (m - j + 1) as u128 / j as u128;
        }
        sum += c;
    }
    (2.0 * sum as f64 / 2f64.powi(m as i32)).min(1.0)
}

/// Gradient of `‖y − Xβ‖² + λ₁‖β‖² + λ₂ Σ_i ‖y − X_iβ_i‖²` from the explicit
/// block formula `2(XᵀX + λ₁I + λ₂M)β − 2(1+λ₂)Xᵀy`.
pub fn ccrc_gradient(d: &PartitionedDictionary, y: &[f64], beta: &[f64], lambda1: f64, lambda2: f64) -> Vec<f64> {
    let x = d.atoms();
    let n = x.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| col(x, j)).collect();
    let dotv = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    (0..n)
        .map(|j| {
            let mut s = lambda1 * beta[j] - (1.0 + lambda2) * dotv(&cols[j], y);
            for k in 0..n {
                let g = dotv(&cols[j], &cols[k]);
                let same = d.class_of(j) == d.class_of(k);
                s += g * beta[k] * if same { 1.0 + lambda2 } else { 1.0 };
            }
            2.0 * s
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}
