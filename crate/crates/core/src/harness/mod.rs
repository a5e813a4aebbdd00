//! Dataset ingestion, splitting, noise injection, experiment execution and
//! report emission.

mod dataset;
mod experiment;
mod noise;
mod sweep;

use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::classifiers::ClassifyError;
use crate::eval::EvalError;
use crate::linalg::LinalgError;
use crate::solvers::SolverError;

pub use dataset::{
    first_k_indices, load_dataset, load_features, load_labels, split_first_k, write_features_binary,
    write_features_csv, write_labels, LabeledDataset, BINARY_MAGIC, BINARY_VERSION,
};
pub use experiment::{
    run_experiment, write_report, ExperimentConfig, ExperimentReport, McNemarMatrix, MethodReport, REPORT_SCHEMA,
};
pub use noise::{add_gaussian_noise, synthetic_blobs, SynthConfig};
pub use sweep::{default_grid, sweep_parameters, write_sweep_csv, SweepCell, DEFAULT_GRID_VALUES};

/// Where a parse error happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseLocation {
    /// 1-based line of a text file.
    Line(usize),
    /// Byte offset into a binary file.
    Offset(u64),
}

impl fmt::Display for ParseLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseLocation::Line(l) => write!(f, "line {l}"),
            ParseLocation::Offset(o) => write!(f, "offset {o}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: parse error at {at}: {message}")]
    Parse { path: PathBuf, at: ParseLocation, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("class {class} has {size} samples, need more than {k}")]
    ClassTooSmall { class: usize, size: usize, k: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{method}: {source}")]
    Setup {
        method: String,
        #[source]
        source: ClassifyError,
    },
    #[error("{method}, test sample {sample}: {source}")]
    Classify {
        method: String,
        sample: usize,
        #[source]
        source: ClassifyError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// True when the error comes from a solver hitting its iteration budget.
    pub fn is_nonconvergence(&self) -> bool {
        let inner = match self {
            HarnessError::Classify { source, .. } | HarnessError::Setup { source, .. } => source,
            HarnessError::Solver(e) => return matches!(e, SolverError::NonConvergence { .. }),
            _ => return false,
        };
        matches!(inner, ClassifyError::Solver(SolverError::NonConvergence { .. }))
    }

    /// True for errors caused by the configuration rather than the data.
    pub fn is_usage(&self) -> bool {
        match self {
            HarnessError::InvalidConfig(_) => true,
            HarnessError::Setup { source, .. } => matches!(
                source,
                ClassifyError::InvalidConfig(_) | ClassifyError::Solver(SolverError::InvalidParameter(_))
            ),
            _ => false,
        }
    }
}
