use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{MethodConfig, Prediction, PreparedClassifier};
use crate::eval::{accuracy, mcnemar_exact, sci, timing_summary, PredictionRecord};
use crate::linalg::{normalized, LinalgError};
use crate::solvers::PartitionedDictionary;

use super::dataset::first_k_indices;
use super::noise::add_gaussian_noise;
use super::{HarnessError, LabeledDataset};

pub const REPORT_SCHEMA: &str = "rbcm-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train_per_class: usize,
    pub methods: Vec<MethodConfig>,
    #[serde(default)]
    pub noise_variance: f64,
    #[serde(default)]
    pub seed: u64,
    /// `(λ₁, λ₂)` pairs for [`sweep_parameters`](super::sweep_parameters).
    #[serde(default)]
    pub parameter_grid: Option<Vec<(f64, f64)>>,
    /// Output paths are not echoed into the report.
    #[serde(default, skip_serializing)]
    pub report_path: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub dump_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(train_per_class: usize, methods: Vec<MethodConfig>) -> Self {
        Self {
            train_per_class,
            methods,
            noise_variance: 0.0,
            seed: 0,
            parameter_grid: None,
            report_path: None,
            dump_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.train_per_class == 0 {
            return Err(HarnessError::InvalidConfig("train_per_class must be at least 1".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(HarnessError::InvalidConfig(format!(
                "noise variance must be >= 0, got {}",
                self.noise_variance
            )));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::InvalidConfig("no methods configured".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.method) {
                return Err(HarnessError::InvalidConfig(format!("method {} listed twice", m.method)));
            }
            m.validate().map_err(|source| HarnessError::Setup { method: m.method.to_string(), source })?;
        }
        if let Some(grid) = &self.parameter_grid {
            if grid.is_empty() {
                return Err(HarnessError::InvalidConfig("parameter grid is empty".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dim: usize,
    pub class_count: usize,
    pub train_samples: usize,
    pub test_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub config: MethodConfig,
    pub accuracy: f64,
    /// Summed per-sample classification time, rounded to milliseconds.
    pub total_seconds: f64,
    /// Mean SCI of the decision coefficients over test samples with a nonzero code.
    pub mean_sci: Option<f64>,
    /// Samples decided from a solver's last iterate.
    pub nonconverged: usize,
    pub records: Vec<PredictionRecord>,
}

/// Pairwise exact McNemar tests; entry `[a][b]` compares method `a` against `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McNemarMatrix {
    pub methods: Vec<String>,
    pub n01: Vec<Vec<usize>>,
    pub n10: Vec<Vec<usize>>,
    pub p_value: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub methods: Vec<MethodReport>,
    pub mcnemar: Option<McNemarMatrix>,
}

/// Full per-method output, including what only goes into the dumps.
struct MethodRun {
    report: MethodReport,
    predictions: Vec<Prediction>,
}

/// Splits, optionally noises and normalizes the test set, classifies every
/// test sample with every configured method and aggregates the results.
/// Writes the report and dumps when the config names output paths.
pub fn run_experiment(cfg: &ExperimentConfig, ds: &LabeledDataset) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let (train_idx, test_idx) = first_k_indices(&ds.labels, ds.class_count, cfg.train_per_class)?;
    let train = ds.subset(&train_idx);
    let dict = PartitionedDictionary::from_labeled_columns(&train.features, &train.labels, ds.class_count)?;
    let test = ds.subset(&test_idx);
    let samples = prepare_test_samples(&test, cfg.noise_variance, cfg.seed, &test_idx)?;

    let mut runs = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        runs.push(run_method(m, &dict, &samples, &test.labels, &test_idx)?);
    }

    let mcnemar = (runs.len() >= 2).then(|| mcnemar_matrix(&runs)).transpose()?;
    let report = ExperimentReport {
        schema: REPORT_SCHEMA.to_string(),
        config: cfg.clone(),
        dataset: DatasetSummary {
            dim: ds.dim(),
            class_count: ds.class_count,
            train_samples: train_idx.len(),
            test_samples: test_idx.len(),
        },
        methods: runs.iter().map(|r| r.report.clone()).collect(),
        mcnemar,
    };
    if let Some(dir) = &cfg.dump_dir {
        let atoms = atom_columns(&train, &train_idx);
        for r in &runs {
            write_dumps(dir, r, &atoms)?;
        }
    }
    if let Some(path) = &cfg.report_path {
        write_report(path, &report)?;
    }
    Ok(report)
}

/// Noised (raw domain) then unit-normalized test columns.
fn prepare_test_samples(
    test: &LabeledDataset,
    variance: f64,
    seed: u64,
    ids: &[usize],
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let noisy = add_gaussian_noise(&test.features, variance, seed)?;
    (0..noisy.cols())
        .map(|j| normalized(&noisy.column(j)).ok_or(HarnessError::Linalg(LinalgError::ZeroColumn(ids[j]))))
        .collect()
}

fn run_method(
    m: &MethodConfig,
    dict: &PartitionedDictionary,
    samples: &[Vec<f64>],
    labels: &[usize],
    ids: &[usize],
) -> Result<MethodRun, HarnessError> {
    let name = m.method.to_string();
    let prepared =
        PreparedClassifier::new(dict, m).map_err(|source| HarnessError::Setup { method: name.clone(), source })?;
    let predictions: Vec<Prediction> = samples
        .par_iter()
        .enumerate()
        .map(|(k, y)| {
            prepared.predict(y).map_err(|source| HarnessError::Classify {
                method: name.clone(),
                sample: ids[k],
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<PredictionRecord> = predictions
        .iter()
        .enumerate()
        .map(|(k, p)| PredictionRecord {
            sample_id: ids[k],
            true_label: labels[k],
            predicted: p.class_index,
            solve_time: p.solve_time,
        })
        .collect();
    let scis: Vec<f64> = predictions.iter().filter_map(|p| sci(&p.coefficients, dict).ok()).collect();
    let mean_sci = (!scis.is_empty()).then(|| scis.iter().sum::<f64>() / scis.len() as f64);
    let total = timing_summary([(name.as_str(), &records[..])])[0].total_seconds;
    let report = MethodReport {
        method: name,
        config: m.clone(),
        accuracy: accuracy(&records)?,
        total_seconds: (total * 1000.0).round() / 1000.0,
        mean_sci,
        nonconverged: predictions.iter().filter(|p| !p.converged).count(),
        records,
    };
    Ok(MethodRun { report, predictions })
}

fn mcnemar_matrix(runs: &[MethodRun]) -> Result<McNemarMatrix, HarnessError> {
    let k = runs.len();
    let mut n01 = vec![vec![0; k]; k];
    let mut n10 = vec![vec![0; k]; k];
    let mut p_value = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let r = mcnemar_exact(&runs[a].report.records, &runs[b].report.records)?;
            n01[a][b] = r.n01;
            n10[a][b] = r.n10;
            p_value[a][b] = r.p_value;
        }
    }
    Ok(McNemarMatrix { methods: runs.iter().map(|r| r.report.method.clone()).collect(), n01, n10, p_value })
}

/// Original dataset column of every dictionary atom, in dictionary order.
fn atom_columns(train: &LabeledDataset, train_idx: &[usize]) -> Vec<usize> {
    (0..train.class_count)
        .flat_map(|c| train.labels.iter().enumerate().filter(move |(_, &l)| l == c).map(|(j, _)| train_idx[j]))
        .collect()
}

fn write_dumps(dir: &Path, run: &MethodRun, atoms: &[usize]) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let name = &run.report.method;
    let classes = run.predictions.first().map_or(0, |p| p.residuals.len());

    let path = dir.join(format!("{name}_coefficients.csv"));
    let mut w = BufWriter::new(fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?);
    let mut lines = vec![format!(
        "sample_id,true_label,predicted,{}",
        atoms.iter().map(|a| format!("atom_{a}")).collect::<Vec<_>>().join(",")
    )];
    for (r, p) in run.report.records.iter().zip(&run.predictions) {
        let vals: Vec<String> = p.coefficients.iter().map(|v| v.to_string()).collect();
        lines.push(format!("{},{},{},{}", r.sample_id, r.true_label, r.predicted, vals.join(",")));
    }
    write_lines(&mut w, &path, &lines)?;

    let path = dir.join(format!("{name}_residuals.csv"));
    let mut w = BufWriter::new(fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?);
    let mut lines = vec![format!(
        "sample_id,true_label,predicted,{}",
        (0..classes).map(|c| format!("class_{c}")).collect::<Vec<_>>().join(",")
    )];
    for (r, p) in run.report.records.iter().zip(&run.predictions) {
        let vals: Vec<String> = p.residuals.values().iter().map(|v| v.to_string()).collect();
        lines.push(format!("{},{},{},{}", r.sample_id, r.true_label, r.predicted, vals.join(",")));
    }
    write_lines(&mut w, &path, &lines)
}

fn write_lines(w: &mut impl Write, path: &Path, lines: &[String]) -> Result<(), HarnessError> {
    for l in lines {
        writeln!(w, "{l}").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_report(path: &Path, report: &ExperimentReport) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
