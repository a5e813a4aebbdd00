//! Small dense linear-algebra kernel.
//!
//! Everything the solvers need lives here: a row-major [`DenseMatrix`], a
//! Cholesky factorization for symmetric positive-definite systems, power
//! iteration for the dominant eigenvalue, Householder least squares, column
//! normalization and the soft-threshold operator.

use std::ops::{Deref, Index, IndexMut};

use thiserror::Error;

/// Relative tolerance used when checking that a matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Columns with an l2-norm below this are treated as zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-12;
/// Default iteration budget of [`max_eigenvalue`].
pub const POWER_ITER_MAX: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("empty matrix or vector")]
    Empty,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("factorization failed: non-positive pivot {pivot:e} at index {index}")]
    FactorizationFailure { index: usize, pivot: f64 },
    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),
}

/// Dense row-major matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if rows * cols != data.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if cols == 0 || rows == 0 {
            return Err(LinalgError::Empty);
        }
        if let Some(bad) = columns.iter().position(|c| c.len() != rows) {
            return Err(LinalgError::DimensionMismatch(format!(
                "column {bad} has length {}, expected {rows}",
                columns[bad].len()
            )));
        }
        let mut data = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Copies the contiguous column range `start..end`.
    pub fn column_block(&self, start: usize, end: usize) -> DenseMatrix {
        assert!(start < end && end <= self.cols);
        DenseMatrix::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    /// Copies an arbitrary selection of columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · v`
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "t_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `selfᵀ · self`, exactly symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                let g_row = &mut g.data[i * n..(i + 1) * n];
                for j in i..n {
                    g_row[j] += a * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add_diagonal(&mut self, s: f64) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self[(i, i)] += s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest `|a_ij - a_ji|` relative to `1 + max|a|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / (1.0 + self.max_abs())
    }

    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Non-empty vector of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(pos));
        }
        Ok(Self(data))
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.0
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `sign(v) · max(|v| - t, 0)`
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|&x| soft_threshold(x, t)).collect()
}

/// Lower-triangular Cholesky factor `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major lower triangle, upper part is zero
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes `a` after symmetrizing it. Fails on the first non-positive pivot.
    pub fn factor(a: &DenseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch(format!(
                "cholesky needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let asym = a.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(LinalgError::NotSymmetric(asym));
        }
        let n = a.rows();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = 0.5 * (a[(j, j)] + a[(j, j)]);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(LinalgError::FactorizationFailure { index: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = 0.5 * (a[(i, j)] + a[(j, i)]);
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                s -= dot(ri, rj);
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal entries of `L`.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.l[i * self.n + i]).collect()
    }

    /// Condition estimate of `A` from the extreme pivots of `L`: `(max/min)²`.
    pub fn condition_estimate(&self) -> f64 {
        let p = self.pivots();
        let max = p.iter().cloned().fold(0.0, f64::max);
        let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        (max / min).powi(2)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let s = b[i] - dot(&self.l[i * n..i * n + i], &b[..i]);
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows(), self.n);
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Solves `A·X = B` for symmetric positive-definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if a.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch(format!("A is {}x{}, B has {} rows", a.rows(), a.cols(), b.rows())));
    }
    Ok(Cholesky::factor(a)?.solve_matrix(b))
}

/// Vector right-hand-side variant of [`solve_spd`].
pub fn solve_spd_vec(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::DimensionMismatch(format!("A has {} rows, b has {} entries", a.rows(), b.len())));
    }
    Ok(Cholesky::factor(a)?.solve(b))
}

/// Dominant eigenvalue of a symmetric positive-semidefinite matrix by power iteration.
///
/// The primary run starts from the normalized all-ones vector. A second run
/// from a fixed alternating-sign vector guards against the all-ones start
/// being orthogonal to the dominant eigenvector; the larger estimate wins.
pub fn max_eigenvalue(a: &DenseMatrix) -> Result<f64, LinalgError> {
    max_eigenvalue_with(a, POWER_ITER_MAX)
}

pub fn max_eigenvalue_with(a: &DenseMatrix, max_iter: usize) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch("max_eigenvalue needs a square matrix".into()));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let n = a.rows();
    let ones = vec![1.0; n];
    let alt: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + i as f64 / n as f64)).collect();
    let first = power_iteration(a, ones, max_iter)?;
    let second = power_iteration(a, alt, max_iter)?;
    Ok(first.max(second))
}

fn power_iteration(a: &DenseMatrix, start: Vec<f64>, max_iter: usize) -> Result<f64, LinalgError> {
    let mut v = start;
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let w = a.matvec(&v);
        let rayleigh = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            // start vector lies in the null space
            return Ok(0.0);
        }
        if (rayleigh - prev).abs() <= 1e-13 * rayleigh.abs().max(f64::MIN_POSITIVE) {
            return Ok(rayleigh.max(0.0));
        }
        prev = rayleigh;
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(LinalgError::NonConvergence(max_iter))
}

/// Scales every column to unit l2-norm.
pub fn normalize_columns(x: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let norms = x.column_norms();
    if let Some(j) = norms.iter().position(|&n| n < ZERO_COLUMN_TOL) {
        return Err(LinalgError::ZeroColumn(j));
    }
    let mut out = x.clone();
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            out[(i, j)] /= norms[j];
        }
    }
    Ok(out)
}

/// Unit-normalizes a vector; `None` if its norm is below [`ZERO_COLUMN_TOL`].
pub fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(v);
    (n >= ZERO_COLUMN_TOL).then(|| v.iter().map(|x| x / n).collect())
}

/// Least-squares solution of `min ‖A·x − b‖₂` by Householder QR.
///
/// Requires `rows ≥ cols`. Returns `None` when a diagonal entry of `R` falls
/// below `rank_tol · max|R_ii|`.
pub fn lstsq_qr(a: &DenseMatrix, b: &[f64], rank_tol: f64) -> Option<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    if m < n {
        return None;
    }
    // column-major working copy
    let mut q: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];
    for k in 0..n {
        let col = &mut q[k];
        let alpha = norm2(&col[k..]);
        if alpha == 0.0 {
            return None;
        }
        let sign = if col[k] >= 0.0 { 1.0 } else { -1.0 };
        let r_kk = -sign * alpha;
        let mut v: Vec<f64> = col[k..].to_vec();
        v[0] -= r_kk;
        let vnorm2 = dot(&v, &v);
        diag[k] = r_kk;
        col[k] = r_kk;
        for x in col[k + 1..].iter_mut() {
            *x = 0.0;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        for other in q.iter_mut().skip(k + 1) {
            let s = 2.0 * dot(&v, &other[k..]) / vnorm2;
            for (o, vi) in other[k..].iter_mut().zip(&v) {
                *o -= s * vi;
            }
        }
        let s = 2.0 * dot(&v, &rhs[k..]) / vnorm2;
        for (o, vi) in rhs[k..].iter_mut().zip(&v) {
            *o -= s * vi;
        }
    }
    let rmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if diag.iter().any(|d| d.abs() <= rank_tol * rmax) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= q[j][i] * x[j];
        }
        x[i] = s / q[i][i];
    }
    Some(x)
}
