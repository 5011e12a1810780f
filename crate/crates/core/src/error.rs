// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by all solver and fitting layers.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors from operator construction, steady-state solves, quadrature,
/// Monte Carlo sampling and least-squares fits.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix dimensions are incompatible with the requested operation.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix that must be Hermitian is not, to the configured tolerance.
    NotHermitian { defect: f64, tol: f64 },
    /// The linear system is singular or numerically rank deficient.
    SingularSystem,
    /// The steady state is not unique (condition estimate above threshold).
    NonUniqueSteadyState { cond: f64, threshold: f64 },
    /// A solved steady state violates a physicality check.
    HygieneViolation {
        check: &'static str,
        value: f64,
        tol: f64,
    },
    /// A parameter is outside its documented domain.
    InvalidParameter {
        name: &'static str,
        message: String,
    },
    /// Nearest-neighbour quadrature did not converge under node doubling.
    QuadratureNotConverged { rel_change: f64, tol: f64 },
    /// Least-squares fit failed (no descent, rank deficiency, max iterations).
    FitFailed { reason: String },
    /// No interior transparency peak could be located in a spectrum.
    NoTransparencyPeak,
    /// Error raised while evaluating one point of a parameter sweep.
    AtGridPoint { x: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// Wrap an error with the sweep coordinate at which it occurred.
    pub fn at_grid_point(self, x: f64) -> Self {
        Error::AtGridPoint {
            x,
            source: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotHermitian { defect, tol } => {
                write!(f, "matrix is not Hermitian: defect {defect:.3e} > {tol:.1e}")
            }
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::NonUniqueSteadyState { cond, threshold } => write!(
                f,
                "steady state is not unique: condition estimate {cond:.3e} > {threshold:.1e}"
            ),
            Error::HygieneViolation { check, value, tol } => write!(
                f,
                "steady-state check `{check}` failed: {value:.3e} exceeds {tol:.1e}"
            ),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::QuadratureNotConverged { rel_change, tol } => write!(
                f,
                "quadrature not converged: doubling nodes changes result by {rel_change:.3e} (> {tol:.1e})"
            ),
            Error::FitFailed { reason } => write!(f, "fit failed: {reason}"),
            Error::NoTransparencyPeak => {
                write!(f, "no interior transparency peak found in spectrum")
            }
            Error::AtGridPoint { x, source } => write!(f, "at sweep point {x}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtGridPoint { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
