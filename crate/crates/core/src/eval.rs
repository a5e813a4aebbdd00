//! Evaluation statistics: accuracy, sparsity concentration, exact McNemar
//! tests and timing totals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm1;
use crate::solvers::PartitionedDictionary;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("coefficient vector has zero l1-norm")]
    ZeroCoefficientVector,
    #[error("empty record set")]
    EmptyRecordSet,
    #[error("mismatched records: {0}")]
    MismatchedRecords(String),
}

/// One classified test sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: usize,
    pub true_label: usize,
    pub predicted: usize,
    pub solve_time: f64,
}

impl PredictionRecord {
    pub fn correct(&self) -> bool {
        self.true_label == self.predicted
    }
}

/// Discordant counts of two classifiers and the exact two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// A wrong, B right.
    pub n01: usize,
    /// A right, B wrong.
    pub n10: usize,
    pub p_value: f64,
}

/// Sparsity concentration index `(C·max_i ‖c_i‖₁/‖c‖₁ − 1)/(C − 1)`, clamped to `[0, 1]`.
pub fn sci(c: &[f64], d: &PartitionedDictionary) -> Result<f64, EvalError> {
    if c.len() != d.n_atoms() {
        return Err(EvalError::MismatchedRecords(format!(
            "coefficient length {} does not match {} atoms",
            c.len(),
            d.n_atoms()
        )));
    }
    let total = norm1(c);
    if total <= 1e-12 {
        return Err(EvalError::ZeroCoefficientVector);
    }
    let top = (0..d.n_classes()).map(|i| norm1(&c[d.class_range(i)])).fold(0.0, f64::max);
    let classes = d.n_classes() as f64;
    let v = (classes * top / total - 1.0) / (classes - 1.0);
    Ok(v.clamp(0.0, 1.0))
}

/// Fraction of records whose prediction equals the true label.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyRecordSet);
    }
    let hits = records.iter().filter(|r| r.correct()).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Two-sided exact binomial p-value for discordant counts `(n01, n10)`:
/// `min(1, 2·Σ_{j≤k} C(m, j)/2^m)` with `k = min(n01, n10)`, `m = n01 + n10`.
pub fn mcnemar_p_value(n01: usize, n10: usize) -> f64 {
    let m = n01 + n10;
    if m == 0 {
        return 1.0;
    }
    let k = n01.min(n10);
    // terms C(m, j)·2^{-m} in log space; they increase for j ≤ k ≤ m/2
    let mut log_term = m as f64 * 0.5f64.ln();
    let mut logs = Vec::with_capacity(k + 1);
    logs.push(log_term);
    for j in 0..k {
        log_term += ((m - j) as f64).ln() - ((j + 1) as f64).ln();
        logs.push(log_term);
    }
    let top = logs[k];
    let tail: f64 = logs.iter().map(|l| (l - top).exp()).sum::<f64>() * top.exp();
    (2.0 * tail).min(1.0)
}

/// Exact McNemar test of classifier `a` against `b` on the same samples.
pub fn mcnemar_exact(a: &[PredictionRecord], b: &[PredictionRecord]) -> Result<McNemarResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::MismatchedRecords(format!("{} records against {}", a.len(), b.len())));
    }
    let (mut n01, mut n10) = (0, 0);
    for (ra, rb) in a.iter().zip(b) {
        if ra.sample_id != rb.sample_id || ra.true_label != rb.true_label {
            return Err(EvalError::MismatchedRecords(format!(
                "sample {} paired with sample {}",
                ra.sample_id, rb.sample_id
            )));
        }
        match (ra.correct(), rb.correct()) {
            (false, true) => n01 += 1,
            (true, false) => n10 += 1,
            _ => {}
        }
    }
    Ok(McNemarResult { n01, n10, p_value: mcnemar_p_value(n01, n10) })
}

/// Total solve time of one method's records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub method: String,
    pub total_seconds: f64,
    pub samples: usize,
    /// Set when the bucket had no records.
    pub empty: bool,
}

/// Sums `solve_time` per method bucket.
pub fn timing_summary<'a, I>(buckets: I) -> Vec<TimingEntry>
where
    I: IntoIterator<Item = (&'a str, &'a [PredictionRecord])>,
{
    buckets
        .into_iter()
        .map(|(method, records)| {
            if records.is_empty() {
                log::warn!("no timing records for {method}");
            }
            TimingEntry {
                method: method.to_string(),
                total_seconds: records.iter().map(|r| r.solve_time).sum(),
                samples: records.len(),
                empty: records.is_empty(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use proptest::prelude::*;

    fn rec(id: usize, truth: usize, pred: usize) -> PredictionRecord {
        PredictionRecord { sample_id: id, true_label: truth, predicted: pred, solve_time: 0.5 }
    }

    fn dict(sizes: Vec<usize>) -> PartitionedDictionary {
        let n = sizes.iter().sum();
        PartitionedDictionary::new(&DenseMatrix::identity(n), sizes).unwrap()
    }

    #[test]
    fn sci_values() {
        let d = dict(vec![2, 2]);
        assert_eq!(sci(&[0.5, -0.5, 0.0, 0.0], &d).unwrap(), 1.0);
        assert_eq!(sci(&[0.25, 0.25, 0.25, -0.25], &d).unwrap(), 0.0);
        assert!((sci(&[0.8, 0.0, 0.0, 0.2], &d).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(sci(&[0.0; 4], &d), Err(EvalError::ZeroCoefficientVector));
        let d3 = dict(vec![1, 1, 1]);
        assert_eq!(sci(&[1.0, 1.0, 1.0], &d3).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(accuracy(&[rec(0, 1, 1), rec(1, 0, 0)]).unwrap(), 1.0);
        assert_eq!(accuracy(&[rec(0, 1, 0), rec(1, 0, 1)]).unwrap(), 0.0);
        let r = [rec(0, 0, 0), rec(1, 1, 1), rec(2, 1, 0), rec(3, 2, 2)];
        assert_eq!(accuracy(&r).unwrap(), 0.75);
        assert_eq!(accuracy(&[]), Err(EvalError::EmptyRecordSet));
    }

    #[test]
    fn mcnemar_values() {
        assert_eq!(mcnemar_p_value(5, 5), 1.0);
        assert_eq!(mcnemar_p_value(0, 0), 1.0);
        assert!((mcnemar_p_value(10, 2) - 158.0 / 4096.0).abs() < 1e-15);
        assert!((mcnemar_p_value(3, 0) - 0.25).abs() < 1e-16);
        // large counts stay finite
        let p = mcnemar_p_value(3000, 2500);
        assert!(p > 0.0 && p < 1e-8);
    }

    #[test]
    fn mcnemar_counts() {
        let a = [rec(0, 0, 1), rec(1, 1, 1), rec(2, 1, 1), rec(3, 0, 0)];
        let b = [rec(0, 0, 0), rec(1, 1, 0), rec(2, 1, 1), rec(3, 0, 0)];
        let r = mcnemar_exact(&a, &b).unwrap();
        assert_eq!((r.n01, r.n10), (1, 1));
        let s = mcnemar_exact(&b, &a).unwrap();
        assert_eq!((s.n01, s.n10, s.p_value), (r.n10, r.n01, r.p_value));
        assert!(mcnemar_exact(&a, &b[..3]).is_err());
        let mut c = b.clone();
        c[2].sample_id = 9;
        assert!(mcnemar_exact(&a, &c).is_err());
    }

    #[test]
    fn timing() {
        let r = [rec(0, 0, 0), rec(1, 0, 0)];
        let t = timing_summary([("SRC", &r[..]), ("CRC", &[][..])]);
        assert_eq!(t[0].total_seconds, 1.0);
        assert!(!t[0].empty);
        assert_eq!(t[1].total_seconds, 0.0);
        assert!(t[1].empty);
    }

    proptest! {
        #[test]
        fn prop_sci_bounded_and_scale_invariant(c in prop::collection::vec(-5.0f64..5.0, 6), s in 0.01f64..100.0) {
            let d = dict(vec![2, 1, 3]);
            prop_assume!(norm1(&c) > 1e-6);
            let a = sci(&c, &d).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            let scaled: Vec<f64> = c.iter().map(|v| v * s).collect();
            prop_assert!((a - sci(&scaled, &d).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn prop_mcnemar_symmetric(a in 0usize..200, b in 0usize..200) {
            let p = mcnemar_p_value(a, b);
            prop_assert_eq!(p, mcnemar_p_value(b, a));
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn prop_accuracy_weighted_mean(x in prop::collection::vec((0usize..3, 0usize..3), 1..30),
                                       y in prop::collection::vec((0usize..3, 0usize..3), 1..30)) {
            let to = |v: &[(usize, usize)]| v.iter().enumerate().map(|(i, &(t, p))| rec(i, t, p)).collect::<Vec<_>>();
            let (ra, rb) = (to(&x), to(&y));
            let all: Vec<_> = ra.iter().chain(&rb).cloned().collect();
            let w = (accuracy(&ra).unwrap() * ra.len() as f64 + accuracy(&rb).unwrap() * rb.len() as f64) / all.len() as f64;
            prop_assert!((accuracy(&all).unwrap() - w).abs() < 1e-12);
        }

        #[test]
        fn prop_timing_monotone(times in prop::collection::vec(0.0f64..2.0, 0..20), extra in 0.0f64..2.0) {
            let mut r: Vec<_> = times.iter().enumerate().map(|(i, &t)| PredictionRecord { solve_time: t, ..rec(i, 0, 0) }).collect();
            let before = timing_summary([("m", &r[..])])[0].total_seconds;
            r.push(PredictionRecord { solve_time: extra, ..rec(99, 0, 0) });
            prop_assert!(timing_summary([("m", &r[..])])[0].total_seconds >= before);
        }
    }
}
