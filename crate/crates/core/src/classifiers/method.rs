use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solvers::SolverOptions;

use super::ClassifyError;

/// The supported representation-based classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SRC")]
    Src,
    #[serde(rename = "CRC")]
    Crc,
    #[serde(rename = "LRC")]
    Lrc,
    #[serde(rename = "CCRC")]
    Ccrc,
    #[serde(rename = "CCRC_L1")]
    CcrcL1,
    #[serde(rename = "NRC")]
    Nrc,
    #[serde(rename = "SCRC")]
    Scrc,
    #[serde(rename = "SA_CRC")]
    SaCrc,
    #[serde(rename = "FRC")]
    Frc,
    #[serde(rename = "SCCRC")]
    Sccrc,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Src,
        Method::Crc,
        Method::Lrc,
        Method::Ccrc,
        Method::CcrcL1,
        Method::Nrc,
        Method::Scrc,
        Method::SaCrc,
        Method::Frc,
        Method::Sccrc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Src => "SRC",
            Method::Crc => "CRC",
            Method::Lrc => "LRC",
            Method::Ccrc => "CCRC",
            Method::CcrcL1 => "CCRC_L1",
            Method::Nrc => "NRC",
            Method::Scrc => "SCRC",
            Method::SaCrc => "SA_CRC",
            Method::Frc => "FRC",
            Method::Sccrc => "SCCRC",
        }
    }

    /// Whether the pipeline runs the l1 (FISTA) solver.
    pub fn uses_l1(self) -> bool {
        matches!(self, Method::Src | Method::Scrc | Method::SaCrc | Method::Frc | Method::Sccrc)
    }

    /// Whether the pipeline applies the ridge operator.
    pub fn uses_ridge(self) -> bool {
        matches!(self, Method::Crc | Method::Scrc | Method::SaCrc | Method::Frc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown method {0:?}")]
pub struct ParseMethodError(pub String);

impl FromStr for Method {
    type Err = ParseMethodError;

    /// Case-insensitive; `-` and `_` are interchangeable (`ccrc-l1`, `SA_CRC`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Method::ALL.into_iter().find(|m| m.name() == key).ok_or_else(|| ParseMethodError(s.to_string()))
    }
}

/// Method selector plus hyperparameters.
///
/// `lambda` weighs the l1 code (SRC and the sparse half of SCRC, SA-CRC, FRC
/// and SCCRC) and the ridge code of CRC, SCRC, SA-CRC and FRC. `lambda1` and
/// `lambda2` are the collaborative and competitive weights of CCRC, CCRC-l1
/// and the CCRC half of SCCRC; in CCRC-l1 `lambda1` multiplies the l1 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
    pub fista: SolverOptions,
    pub alm: SolverOptions,
    /// Treat solver non-convergence as an error instead of using the last iterate.
    #[serde(default)]
    pub fatal_nonconvergence: bool,
}

impl MethodConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.001;
    pub const DEFAULT_THETA: f64 = 0.5;

    pub fn new(method: Method) -> Self {
        Self {
            method,
            lambda: Self::DEFAULT_LAMBDA,
            lambda1: Self::DEFAULT_LAMBDA,
            lambda2: Self::DEFAULT_LAMBDA,
            theta: Self::DEFAULT_THETA,
            fista: SolverOptions::fista(),
            alm: SolverOptions::alm(),
            fatal_nonconvergence: false,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_lambdas(mut self, lambda1: f64, lambda2: f64) -> Self {
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |msg: String| Err(ClassifyError::InvalidConfig(format!("{}: {msg}", self.method)));
        let m = self.method;
        if (m.uses_l1() || m.uses_ridge()) && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if matches!(m, Method::Ccrc | Method::CcrcL1 | Method::Sccrc) {
            if !(self.lambda1 > 0.0 && self.lambda1.is_finite()) {
                return bad(format!("lambda1 must be > 0, got {}", self.lambda1));
            }
            if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
                return bad(format!("lambda2 must be >= 0, got {}", self.lambda2));
            }
        }
        if m == Method::Frc && !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if m.uses_l1() {
            self.fista.validate()?;
        }
        if m == Method::CcrcL1 {
            self.alm.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("sccrc".parse::<Method>().unwrap(), Method::Sccrc);
        assert_eq!("CCRC-L1".parse::<Method>().unwrap(), Method::CcrcL1);
        assert_eq!("sa_crc".parse::<Method>().unwrap(), Method::SaCrc);
        assert!("procrc".parse::<Method>().is_err());
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn defaults() {
        let c = MethodConfig::new(Method::Sccrc);
        assert_eq!((c.lambda, c.lambda1, c.lambda2, c.theta), (0.001, 0.001, 0.001, 0.5));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation() {
        assert!(MethodConfig::new(Method::Frc).with_theta(1.5).validate().is_err());
        assert!(MethodConfig::new(Method::Ccrc).with_lambdas(0.0, 1.0).validate().is_err());
        assert!(MethodConfig::new(Method::Ccrc).with_lambdas(1.0, -1.0).validate().is_err());
        assert!(MethodConfig::new(Method::Src).with_lambda(-1.0).validate().is_err());
        // LRC and NRC have no hyperparameters
        assert!(MethodConfig::new(Method::Lrc).with_lambda(-1.0).validate().is_ok());
    }
}
