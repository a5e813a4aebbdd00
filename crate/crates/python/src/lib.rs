//! Python bindings for the `rbcm` crate. Matrices cross the boundary as
//! lists of rows; a dictionary or feature matrix holds one sample per column.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rbcm::classifiers::{ClassifyError, PreparedClassifier};
use rbcm::harness::{run_experiment, synthetic_blobs, ExperimentConfig, LabeledDataset, SynthConfig};
use rbcm::solvers::{self, SolverError};
use rbcm::{eval, DenseMatrix, Method, MethodConfig, PartitionedDictionary};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn classify_err(e: ClassifyError) -> PyErr {
    match e {
        ClassifyError::Solver(SolverError::NonConvergence { .. }) => PyRuntimeError::new_err(e.to_string()),
        e => value_err(e),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    DenseMatrix::new(r, c, rows.concat()).map_err(value_err)
}

fn rows_of(x: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..x.rows()).map(|i| x.row(i).to_vec()).collect()
}

/// Training samples grouped by class, columns normalized to unit length.
#[pyclass(name = "Dictionary", frozen)]
struct PyDictionary {
    inner: PartitionedDictionary,
}

#[pymethods]
impl PyDictionary {
    /// `atoms` is a d×n list of rows; `class_sizes` counts consecutive columns per class.
    #[new]
    fn new(atoms: Vec<Vec<f64>>, class_sizes: Vec<usize>) -> PyResult<Self> {
        let inner = PartitionedDictionary::new(&matrix(atoms)?, class_sizes).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Columns in any order with one label each; columns are regrouped by class.
    #[staticmethod]
    fn from_labeled(features: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> PyResult<Self> {
        let inner =
            PartitionedDictionary::from_labeled_columns(&matrix(features)?, &labels, class_count).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    #[getter]
    fn n_classes(&self) -> usize {
        self.inner.n_classes()
    }

    #[getter]
    fn class_sizes(&self) -> Vec<usize> {
        self.inner.class_sizes().to_vec()
    }

    fn atoms(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.atoms())
    }

    fn __repr__(&self) -> String {
        format!(
            "Dictionary(dim={}, atoms={}, classes={})",
            self.inner.dim(),
            self.inner.n_atoms(),
            self.inner.n_classes()
        )
    }
}

#[pyclass(name = "MethodConfig", frozen)]
struct PyMethodConfig {
    inner: MethodConfig,
}

#[pymethods]
impl PyMethodConfig {
    #[new]
    #[pyo3(signature = (method, lambda_=0.001, lambda1=0.001, lambda2=0.001, theta=0.5, fatal_nonconvergence=false))]
    fn new(
        method: &str,
        lambda_: f64,
        lambda1: f64,
        lambda2: f64,
        theta: f64,
        fatal_nonconvergence: bool,
    ) -> PyResult<Self> {
        let m: Method = method.parse().map_err(value_err)?;
        let mut inner = MethodConfig::new(m).with_lambda(lambda_).with_lambdas(lambda1, lambda2).with_theta(theta);
        inner.fatal_nonconvergence = fatal_nonconvergence;
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.inner.lambda1
    }

    #[getter]
    fn lambda2(&self) -> f64 {
        self.inner.lambda2
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "MethodConfig({}, lambda_={}, lambda1={}, lambda2={}, theta={})",
            c.method, c.lambda, c.lambda1, c.lambda2, c.theta
        )
    }
}

#[pyclass(name = "Prediction", frozen, get_all)]
struct PyPrediction {
    class_index: usize,
    residuals: Vec<f64>,
    coefficients: Vec<f64>,
    solve_time: f64,
    converged: bool,
}

#[pymethods]
impl PyPrediction {
    fn __repr__(&self) -> String {
        format!("Prediction(class_index={}, converged={})", self.class_index, self.converged)
    }
}

impl From<rbcm::Prediction> for PyPrediction {
    fn from(p: rbcm::Prediction) -> Self {
        Self {
            class_index: p.class_index,
            residuals: p.residuals.values().to_vec(),
            coefficients: p.coefficients.into_inner(),
            solve_time: p.solve_time,
            converged: p.converged,
        }
    }
}

/// Classify one sample.
#[pyfunction]
fn classify(dictionary: &PyDictionary, y: Vec<f64>, config: &PyMethodConfig) -> PyResult<PyPrediction> {
    rbcm::classify(&dictionary.inner, &y, &config.inner).map(Into::into).map_err(classify_err)
}

/// Classify many samples, preparing the method's operators once.
#[pyfunction]
fn classify_many(
    py: Python<'_>,
    dictionary: &PyDictionary,
    samples: Vec<Vec<f64>>,
    config: &PyMethodConfig,
) -> PyResult<Vec<PyPrediction>> {
    py.detach(|| {
        let prepared = PreparedClassifier::new(&dictionary.inner, &config.inner)?;
        samples.iter().map(|y| prepared.predict(y).map(Into::into)).collect::<Result<Vec<_>, _>>()
    })
    .map_err(classify_err)
}

#[pyfunction]
fn method_names() -> Vec<String> {
    Method::ALL.iter().map(|m| m.to_string()).collect()
}

#[pyfunction]
#[pyo3(signature = (dictionary, y, lambda_, max_iter=1000, tol=1e-8))]
fn fista_l1(dictionary: &PyDictionary, y: Vec<f64>, lambda_: f64, max_iter: usize, tol: f64) -> PyResult<Vec<f64>> {
    let opts = rbcm::SolverOptions { max_iter, tol, ..rbcm::SolverOptions::fista() };
    solvers::fista_l1(&dictionary.inner, &y, lambda_, &opts).map(|c| c.into_inner()).map_err(value_err)
}

#[pyfunction]
fn nnls(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    solvers::nnls(&matrix(x)?, &y).map(|c| c.into_inner()).map_err(value_err)
}

#[pyfunction]
fn ridge_code(dictionary: &PyDictionary, y: Vec<f64>, lambda_: f64) -> PyResult<Vec<f64>> {
    let op = solvers::ridge_operator(&dictionary.inner, lambda_).map_err(value_err)?;
    op.apply(&y).map(|c| c.into_inner()).map_err(value_err)
}

#[pyfunction]
fn ccrc_code(dictionary: &PyDictionary, y: Vec<f64>, lambda1: f64, lambda2: f64) -> PyResult<Vec<f64>> {
    let op = solvers::ccrc_operator(&dictionary.inner, lambda1, lambda2).map_err(value_err)?;
    op.apply(&y).map(|c| c.into_inner()).map_err(value_err)
}

#[pyfunction]
fn alm_ccrc_l1(dictionary: &PyDictionary, y: Vec<f64>, lambda1: f64, lambda2: f64) -> PyResult<Vec<f64>> {
    solvers::alm_ccrc_l1(&dictionary.inner, &y, lambda1, lambda2, &rbcm::SolverOptions::alm())
        .map(|c| c.into_inner())
        .map_err(value_err)
}

#[pyfunction]
fn sci(coefficients: Vec<f64>, dictionary: &PyDictionary) -> PyResult<f64> {
    eval::sci(&coefficients, &dictionary.inner).map_err(value_err)
}

#[pyfunction]
fn mcnemar_p_value(n01: usize, n10: usize) -> f64 {
    eval::mcnemar_p_value(n01, n10)
}

#[pyfunction]
fn accuracy(true_labels: Vec<usize>, predicted: Vec<usize>) -> PyResult<f64> {
    if true_labels.len() != predicted.len() {
        return Err(PyValueError::new_err("label sequences differ in length"));
    }
    let records: Vec<_> = true_labels
        .iter()
        .zip(&predicted)
        .enumerate()
        .map(|(i, (&t, &p))| eval::PredictionRecord { sample_id: i, true_label: t, predicted: p, solve_time: 0.0 })
        .collect();
    eval::accuracy(&records).map_err(value_err)
}

/// Returns `(features, labels)` with features as d rows of N values.
#[pyfunction]
#[pyo3(signature = (classes, dim, per_class, separation=1.0, seed=0))]
fn synthetic_dataset(
    classes: usize,
    dim: usize,
    per_class: usize,
    separation: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let ds = synthetic_blobs(&SynthConfig { classes, dim, per_class, separation, seed }).map_err(value_err)?;
    Ok((rows_of(&ds.features), ds.labels))
}

/// Runs a full experiment and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (features, labels, train_per_class, methods, noise_variance=0.0, seed=0))]
fn run_experiment_json(
    py: Python<'_>,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    train_per_class: usize,
    methods: Vec<PyRef<'_, PyMethodConfig>>,
    noise_variance: f64,
    seed: u64,
) -> PyResult<String> {
    let class_count = labels.iter().max().map_or(0, |m| m + 1);
    let ds = LabeledDataset::new(matrix(features)?, labels, class_count).map_err(value_err)?;
    let mut cfg = ExperimentConfig::new(train_per_class, methods.iter().map(|m| m.inner.clone()).collect());
    cfg.noise_variance = noise_variance;
    cfg.seed = seed;
    let report = py.detach(|| run_experiment(&cfg, &ds)).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

#[pymodule]
pub fn pyrbcm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDictionary>()?;
    m.add_class::<PyMethodConfig>()?;
    m.add_class::<PyPrediction>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_many, m)?)?;
    m.add_function(wrap_pyfunction!(method_names, m)?)?;
    m.add_function(wrap_pyfunction!(fista_l1, m)?)?;
    m.add_function(wrap_pyfunction!(nnls, m)?)?;
    m.add_function(wrap_pyfunction!(ridge_code, m)?)?;
    m.add_function(wrap_pyfunction!(ccrc_code, m)?)?;
    m.add_function(wrap_pyfunction!(alm_ccrc_l1, m)?)?;
    m.add_function(wrap_pyfunction!(sci, m)?)?;
    m.add_function(wrap_pyfunction!(mcnemar_p_value, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_json, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
