//! Representation-based classification.
//!
//! A test sample is coded over a dictionary of training samples and assigned
//! to the class whose atoms reconstruct it best. The crate provides the
//! coefficient solvers (l1 via FISTA, ridge and collaborative-competitive
//! closed forms, an augmented Lagrangian l1 solver, NNLS, class-wise least
//! squares), the classifier pipelines built on them (SRC, CRC, LRC, CCRC,
//! CCRC-l1, NRC, SCRC, SA-CRC, FRC and the multiplication-fused SCCRC), the
//! evaluation statistics, and an experiment harness driven by the `rbcm` CLI.

// index loops mirror the math; negated comparisons also reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod eval;
pub mod harness;
pub mod linalg;
pub mod solvers;

#[cfg(test)]
pub(crate) mod testutil;

pub use classifiers::{classify, Method, MethodConfig, Prediction, PreparedClassifier};
pub use linalg::{DenseMatrix, DenseVector};
pub use solvers::{Coefficients, PartitionedDictionary, SolverOptions};
