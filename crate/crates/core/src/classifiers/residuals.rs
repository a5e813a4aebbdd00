use serde::{Deserialize, Serialize};

use crate::linalg::norm2;
use crate::solvers::PartitionedDictionary;

use super::{ClassifyError, DEGENERATE_SLICE_TOL};

/// Per-class reconstruction errors; entries are `>= 0` or `+∞`, at least one finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassResiduals(Vec<f64>);

impl ClassResiduals {
    pub fn new(values: Vec<f64>) -> Result<Self, ClassifyError> {
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(ClassifyError::InvalidConfig("residuals must be >= 0".into()));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(ClassifyError::AllClassesDegenerate);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_aligned(d: &PartitionedDictionary, c: &[f64], y: &[f64]) -> Result<(), ClassifyError> {
    if c.len() != d.n_atoms() {
        return Err(ClassifyError::LengthMismatch { expected: d.n_atoms(), got: c.len() });
    }
    if y.len() != d.dim() {
        return Err(ClassifyError::LengthMismatch { expected: d.dim(), got: y.len() });
    }
    Ok(())
}

fn class_error(d: &PartitionedDictionary, class: usize, c: &[f64], y: &[f64]) -> f64 {
    let slice = &c[d.class_range(class)];
    let recon = d.class_reconstruction(class, slice);
    let r: Vec<f64> = y.iter().zip(&recon).map(|(p, q)| p - q).collect();
    norm2(&r)
}

/// `r_i = ‖y − X_i c_i‖₂`
pub fn class_residuals_plain(d: &PartitionedDictionary, c: &[f64], y: &[f64]) -> Result<ClassResiduals, ClassifyError> {
    check_aligned(d, c, y)?;
    ClassResiduals::new((0..d.n_classes()).map(|i| class_error(d, i, c, y)).collect())
}

/// `r_i = ‖y − X_i c_i‖₂ / ‖c_i‖₂`, with `+∞` for numerically zero slices.
pub fn class_residuals_regularized(
    d: &PartitionedDictionary,
    c: &[f64],
    y: &[f64],
) -> Result<ClassResiduals, ClassifyError> {
    check_aligned(d, c, y)?;
    let values = (0..d.n_classes())
        .map(|i| {
            let norm = norm2(&c[d.class_range(i)]);
            if norm < DEGENERATE_SLICE_TOL {
                f64::INFINITY
            } else {
                class_error(d, i, c, y) / norm
            }
        })
        .collect();
    ClassResiduals::new(values)
}

/// Index of the smallest residual, lowest index on ties.
pub fn argmin_class(r: &ClassResiduals) -> usize {
    let mut best = 0;
    for (i, &v) in r.values().iter().enumerate() {
        if v < r.values()[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::testutil::{random_dictionary, random_unit_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn res(v: &[f64]) -> ClassResiduals {
        ClassResiduals::new(v.to_vec()).unwrap()
    }

    #[test]
    fn argmin_cases() {
        assert_eq!(argmin_class(&res(&[0.3, 0.1, 0.2])), 1);
        assert_eq!(argmin_class(&res(&[0.5, 0.5])), 0);
        assert_eq!(argmin_class(&res(&[f64::INFINITY, 2.0])), 1);
    }

    #[test]
    fn residuals_need_a_finite_entry() {
        assert_eq!(ClassResiduals::new(vec![f64::INFINITY; 2]), Err(ClassifyError::AllClassesDegenerate));
    }

    #[test]
    fn plain_zero_code_gives_sample_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_dictionary(&mut rng, 5, &[2, 3]);
        let y = [0.5, -1.0, 0.0, 2.0, 0.25];
        let r = class_residuals_plain(&d, &[0.0; 5], &y).unwrap();
        for v in r.values() {
            assert!((v - norm2(&y)).abs() < 1e-15);
        }
    }

    #[test]
    fn plain_exact_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_dictionary(&mut rng, 5, &[2, 3]);
        let c = [0.0, 0.0, 0.4, -0.2, 0.9];
        let y = d.atoms().matvec(&c);
        let r = class_residuals_plain(&d, &c, &y).unwrap();
        assert!(r.values()[1] < 1e-15);
        assert!(r.values()[0] > 0.1);
    }

    #[test]
    fn plain_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_dictionary(&mut rng, 6, &[2, 2, 3]);
        let y = random_unit_vector(&mut rng, 6);
        let c: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = class_residuals_plain(&d, &c, &y).unwrap();
        let x = d.atoms();
        for class in 0..3 {
            let mut sq = 0.0;
            for i in 0..6 {
                let mut v = y[i];
                for j in 0..7 {
                    if d.class_of(j) == class {
                        v -= x[(i, j)] * c[j];
                    }
                }
                sq += v * v;
            }
            assert!((r.values()[class] - sq.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn regularized_single_nonzero_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_dictionary(&mut rng, 4, &[2, 2]);
        let r = class_residuals_regularized(&d, &[0.0, 0.0, 0.3, 0.1], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(r.values()[0].is_infinite());
        assert!(r.values()[1].is_finite());
    }

    #[test]
    fn regularized_identity_dictionary() {
        // X = I4, classes {0,1} and {2,3}; y along atom 2 and a uniform code
        let d = PartitionedDictionary::new(&DenseMatrix::identity(4), vec![2, 2]).unwrap();
        let r = class_residuals_regularized(&d, &[0.5; 4], &[0.0, 0.0, 1.0, 0.0]).unwrap();
        // class 0: ‖(−.5,−.5,1,0)‖/‖(.5,.5)‖ = sqrt(1.5)/sqrt(.5) = sqrt(3)
        // class 1: ‖(0,0,.5,−.5)‖/‖(.5,.5)‖ = 1
        assert!((r.values()[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((r.values()[1] - 1.0).abs() < 1e-14);
        assert_eq!(argmin_class(&r), 1);
    }

    #[test]
    fn regularized_zero_code_is_degenerate() {
        let d = PartitionedDictionary::new(&DenseMatrix::identity(4), vec![2, 2]).unwrap();
        assert_eq!(
            class_residuals_regularized(&d, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0]),
            Err(ClassifyError::AllClassesDegenerate)
        );
    }
}
