use std::ops::Range;

use crate::linalg::{normalize_columns, DenseMatrix};

use super::SolverError;

/// Training matrix `X` (d×n) whose columns are grouped contiguously by class.
///
/// Columns are unit-normalized on construction.
#[derive(Debug, Clone)]
pub struct PartitionedDictionary {
    atoms: DenseMatrix,
    class_sizes: Vec<usize>,
    class_offsets: Vec<usize>,
}

impl PartitionedDictionary {
    pub fn new(x: &DenseMatrix, class_sizes: Vec<usize>) -> Result<Self, SolverError> {
        if class_sizes.len() < 2 {
            return Err(SolverError::InvalidPartition(format!("need at least 2 classes, got {}", class_sizes.len())));
        }
        if let Some(c) = class_sizes.iter().position(|&s| s == 0) {
            return Err(SolverError::InvalidPartition(format!("class {c} is empty")));
        }
        let total: usize = class_sizes.iter().sum();
        if total != x.cols() {
            return Err(SolverError::InvalidPartition(format!(
                "class sizes sum to {total}, dictionary has {} columns",
                x.cols()
            )));
        }
        let atoms = normalize_columns(x)?;
        let mut class_offsets = Vec::with_capacity(class_sizes.len() + 1);
        let mut acc = 0;
        class_offsets.push(0);
        for &s in &class_sizes {
            acc += s;
            class_offsets.push(acc);
        }
        Ok(Self { atoms, class_sizes, class_offsets })
    }

    /// Builds a dictionary from per-column labels, reordering columns so
    /// each class is contiguous (stable within a class).
    pub fn from_labeled_columns(x: &DenseMatrix, labels: &[usize], class_count: usize) -> Result<Self, SolverError> {
        if labels.len() != x.cols() {
            return Err(SolverError::InvalidPartition(format!("{} labels for {} columns", labels.len(), x.cols())));
        }
        let mut order = Vec::with_capacity(labels.len());
        let mut sizes = vec![0usize; class_count];
        for c in 0..class_count {
            for (j, &l) in labels.iter().enumerate() {
                if l == c {
                    order.push(j);
                    sizes[c] += 1;
                }
            }
        }
        if order.len() != labels.len() {
            return Err(SolverError::InvalidPartition("label outside [0, class_count)".into()));
        }
        Self::new(&x.select_columns(&order), sizes)
    }

    #[inline]
    pub fn atoms(&self) -> &DenseMatrix {
        &self.atoms
    }

    /// Sample dimension `d`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.atoms.rows()
    }

    /// Number of atoms `n`.
    #[inline]
    pub fn n_atoms(&self) -> usize {
        self.atoms.cols()
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn class_offsets(&self) -> &[usize] {
        &self.class_offsets
    }

    /// Column range of class `i`.
    #[inline]
    pub fn class_range(&self, i: usize) -> Range<usize> {
        self.class_offsets[i]..self.class_offsets[i + 1]
    }

    /// Class owning column `j`.
    pub fn class_of(&self, j: usize) -> usize {
        self.class_offsets.partition_point(|&o| o <= j) - 1
    }

    pub fn class_block(&self, i: usize) -> DenseMatrix {
        let r = self.class_range(i);
        self.atoms.column_block(r.start, r.end)
    }

    /// `X_i · c` for a coefficient slice of class `i`.
    pub fn class_reconstruction(&self, i: usize, coeffs: &[f64]) -> Vec<f64> {
        let r = self.class_range(i);
        debug_assert_eq!(coeffs.len(), r.len());
        let mut out = vec![0.0; self.dim()];
        for row in 0..self.dim() {
            let xr = &self.atoms.row(row)[r.clone()];
            out[row] = crate::linalg::dot(xr, coeffs);
        }
        out
    }

    /// Block-diagonal matrix `M = diag(X_1ᵀX_1, …, X_CᵀX_C)` taken from the
    /// full Gram matrix.
    pub fn competitive_block(&self, gram: &DenseMatrix) -> DenseMatrix {
        let n = self.n_atoms();
        let mut m = DenseMatrix::zeros(n, n);
        for c in 0..self.n_classes() {
            let r = self.class_range(c);
            for i in r.clone() {
                for j in r.clone() {
                    m[(i, j)] = gram[(i, j)];
                }
            }
        }
        m
    }

    /// Same atoms with classes (and their columns) reordered by `class_order`.
    pub fn permute_classes(&self, class_order: &[usize]) -> Result<Self, SolverError> {
        let mut cols = Vec::with_capacity(self.n_atoms());
        let mut sizes = Vec::with_capacity(class_order.len());
        for &c in class_order {
            cols.extend(self.class_range(c));
            sizes.push(self.class_sizes[c]);
        }
        Self::new(&self.atoms.select_columns(&cols), sizes)
    }
}
