use std::fmt;

use thiserror::Error;

/// One violated parameter invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub message: String,
}

impl ParamViolation {
    pub(crate) fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_violations(violations: &[ParamViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error(
        "quadrature for {quantity} did not converge: successive refinements differ by {achieved:e} (target {target:e})"
    )]
    Quadrature {
        quantity: &'static str,
        achieved: f64,
        target: f64,
    },

    #[error(
        "covariance matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tolerance:e}"
    )]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("second law violated by the analytic mean: W - dF = {irreversible_work:e} J (tolerance {tolerance:e} J)")]
    SecondLaw {
        irreversible_work: f64,
        tolerance: f64,
    },

    #[error("configuration mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// True for failures of numerical integrity (quadrature, PSD, second-law checks),
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::NotPositiveSemidefinite { .. } | Error::SecondLaw { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
