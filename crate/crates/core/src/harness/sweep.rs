use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{Method, MethodConfig};

use super::{run_experiment, ExperimentConfig, HarnessError, LabeledDataset};

/// Candidate values for each of `λ₁` and `λ₂`.
pub const DEFAULT_GRID_VALUES: [f64; 10] = [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];

/// The full `10×10` product of [`DEFAULT_GRID_VALUES`], `λ₁`-major.
pub fn default_grid() -> Vec<(f64, f64)> {
    DEFAULT_GRID_VALUES.iter().flat_map(|&a| DEFAULT_GRID_VALUES.iter().map(move |&b| (a, b))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

/// SCCRC accuracy over the configured `(λ₁, λ₂)` grid (default grid when
/// unset). Other settings come from the config's SCCRC entry, or the method
/// defaults when there is none. A failing cell is recorded and skipped.
pub fn sweep_parameters(cfg: &ExperimentConfig, ds: &LabeledDataset) -> Result<Vec<SweepCell>, HarnessError> {
    let grid = cfg.parameter_grid.clone().unwrap_or_else(default_grid);
    if grid.is_empty() {
        return Err(HarnessError::InvalidConfig("parameter grid is empty".into()));
    }
    let base = cfg
        .methods
        .iter()
        .find(|m| m.method == Method::Sccrc)
        .cloned()
        .unwrap_or_else(|| MethodConfig::new(Method::Sccrc));
    let mut cells = Vec::with_capacity(grid.len());
    for (lambda1, lambda2) in grid {
        let run_cfg = ExperimentConfig {
            methods: vec![base.clone().with_lambdas(lambda1, lambda2)],
            parameter_grid: None,
            report_path: None,
            dump_dir: None,
            ..cfg.clone()
        };
        let cell = match run_experiment(&run_cfg, ds) {
            Ok(r) => SweepCell { lambda1, lambda2, accuracy: Some(r.methods[0].accuracy), error: None },
            Err(e) => {
                // split and dataset problems hit every cell alike
                if matches!(e, HarnessError::ClassTooSmall { .. } | HarnessError::Linalg(_) | HarnessError::Solver(_)) {
                    return Err(e);
                }
                log::warn!("sweep cell ({lambda1:e}, {lambda2:e}) failed: {e}");
                SweepCell { lambda1, lambda2, accuracy: None, error: Some(e.to_string()) }
            }
        };
        cells.push(cell);
    }
    Ok(cells)
}

/// CSV rows `lambda1,lambda2,accuracy,error`; failed cells leave accuracy empty.
pub fn write_sweep_csv(path: &Path, cells: &[SweepCell]) -> Result<(), HarnessError> {
    let mut out = String::from("lambda1,lambda2,accuracy,error\n");
    for c in cells {
        let acc = c.accuracy.map(|a| a.to_string()).unwrap_or_default();
        let err = c.error.as_deref().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default();
        out.push_str(&format!("{:e},{:e},{acc},{err}\n", c.lambda1, c.lambda2));
    }
    fs::write(path, out).map_err(|e| HarnessError::io(path, e))
}
