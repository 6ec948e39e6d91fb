//! Types shared by the four diagonal-space solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, HessianDefect};
use crate::spectrum::StationaryPoint;

/// Iteration cap used by every iterative solver.
pub const DEFAULT_MAX_ITER: usize = 200;
/// Bracket width (bisection) or relative step size (iterative solvers) at which to stop.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Stop bisecting once `|prod(p) - 1|` falls below this.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bisection,
    Composite,
    NewtonHyp,
    NewtonLog,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Bisection,
        Algorithm::Composite,
        Algorithm::NewtonHyp,
        Algorithm::NewtonLog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bisection => "bisection",
            Algorithm::Composite => "composite",
            Algorithm::NewtonHyp => "newton-hyp",
            Algorithm::NewtonLog => "newton-log",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    SingularHessian,
    NoBracket,
    /// Newton iterates left the range where `exp` is representable.
    Diverged,
}

impl SolverStatus {
    pub fn is_converged(self) -> bool {
        self == SolverStatus::Converged
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterations => "max_iterations",
            SolverStatus::SingularHessian => "singular_hessian",
            SolverStatus::NoBracket => "no_bracket",
            SolverStatus::Diverged => "diverged",
        }
    }
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every iterate in [`SolverReport::iterates`].
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            record_iterates: false,
        }
    }
}

impl SolveOptions {
    pub fn recording() -> Self {
        Self {
            record_iterates: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub iterations: usize,
    /// Stationarity residual of the returned point.
    pub residual: f64,
    /// `|prod(p) - 1|` of the returned point.
    pub feasibility: f64,
    /// Final bracket width (bisection) or relative step (iterative solvers).
    pub last_step: f64,
    /// Initial search interval of the multiplier bisection.
    pub bracket: Option<(f64, f64)>,
    pub singularity: Option<HessianDefect>,
    /// Composite steps that increased the distance by more than `1e-12`.
    pub descent_violations: usize,
    /// Largest `|c+| / |c|^2` observed once `|c| < 1e-3` (Newton only).
    pub quadratic_constant: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub iterates: Vec<Vec<f64>>,
}

impl SolverReport {
    pub(crate) fn new(status: SolverStatus) -> Self {
        Self {
            status,
            iterations: 0,
            residual: f64::NAN,
            feasibility: f64::NAN,
            last_step: f64::NAN,
            bracket: None,
            singularity: None,
            descent_violations: 0,
            quadratic_constant: None,
            iterates: Vec::new(),
        }
    }
}

/// A stationary point together with the report of the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub point: StationaryPoint,
    pub report: SolverReport,
}

impl Solution {
    pub(crate) fn finish(a: &[f64], p: Vec<f64>, lambda: f64, mut report: SolverReport) -> Self {
        let residual = crate::spectrum::stationarity_residual(a, &p, lambda).unwrap_or(f64::INFINITY);
        let feasibility = (crate::spectrum::prod(&p) - 1.0).abs();
        report.residual = residual;
        report.feasibility = feasibility;
        Solution {
            point: StationaryPoint { p, lambda, residual },
            report,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.report.status.is_converged()
    }
}
