//! Matrix-level projection onto `SL(n)`.
//!
//! `A = U diag(sigma) V^T` is reduced to the diagonal problem on `sigma`.
//! When `det(U) det(V) = -1` the sign is folded into the last column of `V`
//! and the smallest singular value is negated; such spectra are always
//! handed to the bisection solver. The projection is `P = U diag(p) V'^T`.

use serde::{Deserialize, Serialize};

use crate::bisection;
use crate::composite;
use crate::coords::initial_iterate;
use crate::error::{Error, Result};
use crate::linalg::{svd, MatrixN};
use crate::newton;
use crate::solver::{Algorithm, SolveOptions, Solution, SolverReport, SolverStatus};
use crate::spectrum::Spectrum;

/// Tolerance on Hessian entries in the second-order check of the default mode.
const SECOND_ORDER_TOL: f64 = 1e-12;
/// Largest `|prod(p) - 1|` accepted from the Newton stage of the default mode.
const ACCEPT_FEASIBILITY: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionResult {
    #[serde(rename = "P")]
    pub p_matrix: MatrixN,
    pub p_diag: Vec<f64>,
    pub lambda: f64,
    /// The solver that produced `p_diag`.
    pub algorithm: Algorithm,
    pub report: SolverReport,
    /// `1/2 |A - P|_F^2`.
    pub distance: f64,
    /// Singular values with the sign of `det A` folded into the last entry.
    pub spectrum: Vec<f64>,
    pub sign_flipped: bool,
    pub u: MatrixN,
    /// Right singular vectors with the sign folded into the last column.
    pub v: MatrixN,
}

impl ProjectionResult {
    pub fn is_converged(&self) -> bool {
        self.report.status.is_converged()
    }
}

/// Solution of the diagonal problem together with the solver that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalResult {
    pub solution: Solution,
    pub algorithm: Algorithm,
}

/// Projects `a` onto `SL(n)`.
///
/// With `algorithm = None` the log-coordinate Newton method is tried first
/// and its result is kept only if it converged to a point satisfying the
/// second-order conditions; otherwise bisection is used.
pub fn project(a: &MatrixN, algorithm: Option<Algorithm>, opts: &SolveOptions) -> Result<ProjectionResult> {
    let n = a.n();
    let f = svd(a)?;
    let mut u = f.u;
    let mut v = f.v;
    let mut sigma = f.sigma;
    let mut flipped = f.sign < 0;
    if flipped && sigma[n - 1] <= n as f64 * f64::EPSILON * sigma[0] {
        // numerically singular: either sign is a valid decomposition
        sigma[n - 1] = 0.0;
        for i in 0..n {
            u.set(i, n - 1, -u.get(i, n - 1));
        }
        flipped = false;
    }
    let spectrum = if flipped {
        for i in 0..n {
            v.set(i, n - 1, -v.get(i, n - 1));
        }
        sigma[n - 1] = -sigma[n - 1];
        Spectrum::sign_flipped(sigma)?
    } else {
        Spectrum::new(sigma)?
    };

    let diag = project_spectrum(&spectrum, algorithm, opts)?;
    let p = diag.solution.point.p.clone();
    let p_matrix = MatrixN::compose(&u, &p, &v);
    let distance = 0.5 * {
        let d = &p_matrix - a;
        let fro = d.frobenius_norm();
        fro * fro
    };
    Ok(ProjectionResult {
        p_matrix,
        p_diag: p,
        lambda: diag.solution.point.lambda,
        algorithm: diag.algorithm,
        report: diag.solution.report,
        distance,
        spectrum: spectrum.into_vec(),
        sign_flipped: flipped,
        u,
        v,
    })
}

/// Solves the diagonal problem for `a` with the requested solver.
///
/// Sign-flipped spectra always use bisection. Solver failures are reported
/// through the status of the returned report; errors are returned only for
/// invalid arguments.
pub fn project_spectrum(a: &Spectrum, algorithm: Option<Algorithm>, opts: &SolveOptions) -> Result<DiagonalResult> {
    if a.is_sign_flipped() {
        return Ok(DiagonalResult {
            solution: run(a, Algorithm::Bisection, opts)?,
            algorithm: Algorithm::Bisection,
        });
    }
    match algorithm {
        Some(alg) => Ok(DiagonalResult {
            solution: run(a, alg, opts)?,
            algorithm: alg,
        }),
        None => {
            let newton = run(a, Algorithm::NewtonLog, opts)?;
            if newton.is_converged()
                && newton.report.feasibility <= ACCEPT_FEASIBILITY
                && is_local_minimizer(a, &newton.point.p)
            {
                return Ok(DiagonalResult {
                    solution: newton,
                    algorithm: Algorithm::NewtonLog,
                });
            }
            Ok(DiagonalResult {
                solution: run(a, Algorithm::Bisection, opts)?,
                algorithm: Algorithm::Bisection,
            })
        }
    }
}

fn run(a: &Spectrum, alg: Algorithm, opts: &SolveOptions) -> Result<Solution> {
    let out = match alg {
        Algorithm::Bisection => bisection::solve(a, opts),
        Algorithm::Composite => composite::solve(a, None, opts),
        Algorithm::NewtonHyp => newton::solve_hyp(a, None, opts),
        Algorithm::NewtonLog => newton::solve_log(a, None, opts),
    };
    match out {
        Ok(s) => Ok(s),
        Err(Error::NoBracket { lo, hi }) => {
            let mut report = SolverReport::new(SolverStatus::NoBracket);
            report.bracket = Some((lo, hi));
            Ok(fallback(a, report))
        }
        Err(Error::InvalidIterate(_)) | Err(Error::Domain { .. }) => {
            Ok(fallback(a, SolverReport::new(SolverStatus::Diverged)))
        }
        Err(e) => Err(e),
    }
}

fn fallback(a: &Spectrum, report: SolverReport) -> Solution {
    let p = initial_iterate(a).unwrap_or_else(|_| vec![1.0; a.len()]);
    let lambda = crate::spectrum::estimate_lambda(a, &p).unwrap_or(f64::NAN);
    Solution::finish(a, p, lambda, report)
}

/// Second-order sufficient condition at a stationary point `p`.
///
/// In log coordinates the Lagrangian Hessian is `diag(D)` with
/// `D_i = p_i (2 p_i - a_i)` and the constraint tangent space is the
/// complement of `1`; the restriction is positive definite iff all `D_i > 0`
/// (one zero allowed) or exactly one `D_i < 0` and `sum 1/D_i < 0`.
pub fn is_local_minimizer(a: &[f64], p: &[f64]) -> bool {
    let d: Vec<f64> = p.iter().zip(a).map(|(pi, ai)| pi * (2.0 * pi - ai)).collect();
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = SECOND_ORDER_TOL * scale.max(1.0);
    let negative = d.iter().filter(|&&x| x < -tol).count();
    let zero = d.iter().filter(|&&x| x.abs() <= tol).count();
    match (negative, zero) {
        (0, 0) | (0, 1) => true,
        (1, 0) => d.iter().map(|x| 1.0 / x).sum::<f64>() < 0.0,
        _ => false,
    }
}
