//! Newton's method in logarithmic and hyperbolic coordinates.
//!
//! In log coordinates `xi = log p` the objective is
//! `1/2 sum (exp(xi_i) - a_i)^2` subject to `sum xi_i = 0`; the Hessian is
//! diagonal and the bordered Newton matrix is an arrowhead, invertible in
//! `O(n)`. In hyperbolic coordinates the constraint disappears and the
//! reduced Hessian `B_bar^T D B_bar` is solved densely. Both use a constant
//! step length of one and no Hessian modification.

use crate::coords::{exp_checked, hyp_from_euclidean, initial_iterate, HypPoint, HyperbolicBasis, MAX_LOG_COORD};
use crate::error::{Error, HessianDefect, Result};
use crate::linalg::dense_solve;
use crate::solver::{SolveOptions, Solution, SolverReport, SolverStatus};
use crate::spectrum::{estimate_lambda, norm_inf, Spectrum};

/// Relative threshold below which a Hessian diagonal entry counts as zero.
pub const SINGULAR_TOL: f64 = 1e-14;
/// Guard for the relative correction when the iterate norm is zero.
const NORM_FLOOR: f64 = 1e-30;
/// Corrections below this size feed the quadratic-rate estimate.
const TAIL_START: f64 = 1e-3;
/// Admissibility of a user-supplied log-coordinate start.
const START_SUM_TOL: f64 = 1e-10;

/// Gradient and diagonal Hessian of the log-coordinate objective.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSystemLog {
    /// `e_i (e_i - a_i)` with `e = exp(xi)`
    pub gradient: Vec<f64>,
    /// `e_i (2 e_i - a_i)`
    pub hess_diag: Vec<f64>,
}

pub fn newton_system_log(a: &[f64], xi: &[f64]) -> Result<NewtonSystemLog> {
    assert_eq!(a.len(), xi.len(), "dimension mismatch");
    let e = exp_checked(xi)?;
    let gradient = e.iter().zip(a).map(|(ei, ai)| ei * (ei - ai)).collect();
    let hess_diag = e.iter().zip(a).map(|(ei, ai)| ei * (2.0 * ei - ai)).collect();
    Ok(NewtonSystemLog { gradient, hess_diag })
}

/// Solves `[[D, 1], [1^T, 0]] (c, w) = rhs` in linear time.
///
/// Uses `M^{-1} = [[D^{-1}, 0], [0, 0]] + rho u u^T` with
/// `u = (diag(D^{-1}), -1)` and `rho = -1 / tr(D^{-1})`.
pub fn arrowhead_solve(d: &[f64], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = d.len();
    if rhs.len() != n + 1 {
        return Err(Error::Shape {
            expected: n + 1,
            actual: rhs.len(),
        });
    }
    let d_norm = norm_inf(d);
    if d.iter().any(|di| di.abs() < SINGULAR_TOL * d_norm) || d_norm == 0.0 {
        return Err(Error::SingularHessian(HessianDefect::ZeroDiagonal));
    }
    let inv: Vec<f64> = d.iter().map(|di| 1.0 / di).collect();
    let trace: f64 = inv.iter().sum();
    if trace.abs() < SINGULAR_TOL * norm_inf(&inv) {
        return Err(Error::SingularHessian(HessianDefect::TraceCondition));
    }
    let rho = -1.0 / trace;
    let s: f64 = inv.iter().zip(rhs).map(|(v, r)| v * r).sum::<f64>() - rhs[n];
    let c = inv
        .iter()
        .zip(rhs)
        .map(|(v, r)| v * r + rho * v * s)
        .collect();
    Ok((c, -rho * s))
}

fn record_tail(report: &mut SolverReport, prev: Option<f64>, cur: f64) {
    if let Some(prev) = prev {
        if prev < TAIL_START && prev > 0.0 {
            let ratio = cur / (prev * prev);
            report.quadratic_constant = Some(report.quadratic_constant.map_or(ratio, |c| c.max(ratio)));
        }
    }
}

fn failed(a: &[f64], xi: &[f64], status: SolverStatus, mut report: SolverReport) -> Result<Solution> {
    report.status = status;
    let p: Vec<f64> = xi.iter().map(|v| v.clamp(-MAX_LOG_COORD, MAX_LOG_COORD).exp()).collect();
    let lambda = estimate_lambda(a, &p).unwrap_or(f64::NAN);
    Ok(Solution::finish(a, p, lambda, report))
}

/// Newton's method in log coordinates with the linear constraint kept explicit.
pub fn solve_log(a: &Spectrum, xi0: Option<&[f64]>, opts: &SolveOptions) -> Result<Solution> {
    let n = a.len();
    let mut xi = match xi0 {
        Some(x) => {
            let s: f64 = x.iter().sum();
            if s.abs() > START_SUM_TOL {
                return Err(Error::InvalidIterate(format!(
                    "log-coordinate start has sum {s:e}, expected 0"
                )));
            }
            x.to_vec()
        }
        None => default_log_start(a)?,
    };
    let mut report = SolverReport::new(SolverStatus::MaxIterations);
    if opts.record_iterates {
        report.iterates.push(xi.clone());
    }
    let mut prev_step: Option<f64> = None;
    for k in 1..=opts.max_iter {
        let sys = match newton_system_log(a, &xi) {
            Ok(s) => s,
            Err(Error::Overflow(_) | Error::NonFinite(_)) => return failed(a, &xi, SolverStatus::Diverged, report),
            Err(e) => return Err(e),
        };
        let mut rhs: Vec<f64> = sys.gradient.iter().map(|g| -g).collect();
        rhs.push(0.0);
        let (c, _w) = match arrowhead_solve(&sys.hess_diag, &rhs) {
            Ok(sol) => sol,
            Err(Error::SingularHessian(defect)) => {
                report.singularity = Some(defect);
                return failed(a, &xi, SolverStatus::SingularHessian, report);
            }
            Err(Error::NonFinite(_)) => return failed(a, &xi, SolverStatus::Diverged, report),
            Err(e) => return Err(e),
        };
        let step = norm_inf(&c);
        let rel = step / norm_inf(&xi).max(NORM_FLOOR);
        for (x, ci) in xi.iter_mut().zip(&c) {
            *x += ci;
        }
        report.iterations = k;
        report.last_step = rel;
        record_tail(&mut report, prev_step, step);
        prev_step = Some(step);
        if opts.record_iterates {
            report.iterates.push(xi.clone());
        }
        if rel < opts.tol {
            report.status = SolverStatus::Converged;
            break;
        }
    }
    debug_assert_eq!(xi.len(), n);
    let p = match exp_checked(&xi) {
        Ok(p) => p,
        Err(_) => return failed(a, &xi, SolverStatus::Diverged, report),
    };
    let lambda = estimate_lambda(a, &p)?;
    Ok(Solution::finish(a, p, lambda, report))
}

/// `log` of the standard initial iterate, re-centred to an exact zero sum.
pub fn default_log_start(a: &Spectrum) -> Result<Vec<f64>> {
    let p0 = initial_iterate(a)?;
    let mut xi: Vec<f64> = p0.iter().map(|v| v.ln()).collect();
    let mean = xi.iter().sum::<f64>() / xi.len() as f64;
    xi.iter_mut().for_each(|v| *v -= mean);
    Ok(xi)
}

/// Hyperbolic coordinates of the standard initial iterate.
pub fn default_hyp_start(a: &Spectrum) -> Result<HypPoint> {
    Ok(hyp_from_euclidean(&initial_iterate(a)?)?.0)
}

fn classify_dense_singularity(d: &[f64]) -> HessianDefect {
    let d_norm = norm_inf(d);
    let zeros = d.iter().filter(|di| di.abs() < SINGULAR_TOL * d_norm).count();
    if zeros >= 2 {
        return HessianDefect::ZeroDiagonal;
    }
    if zeros == 0 {
        let inv: Vec<f64> = d.iter().map(|di| 1.0 / di).collect();
        let trace: f64 = inv.iter().sum();
        if trace.abs() < 1e-8 * norm_inf(&inv) {
            return HessianDefect::TraceCondition;
        }
    }
    HessianDefect::DenseSingular
}

/// Newton's method on the unconstrained hyperbolic formulation.
pub fn solve_hyp(a: &Spectrum, zeta0: Option<&HypPoint>, opts: &SolveOptions) -> Result<Solution> {
    let n = a.len();
    let basis = HyperbolicBasis::new(n);
    let mut zeta = match zeta0 {
        Some(z) => {
            if z.zeta_bar.len() != n - 1 {
                return Err(Error::Shape {
                    expected: n - 1,
                    actual: z.zeta_bar.len(),
                });
            }
            z.zeta_bar.clone()
        }
        None => default_hyp_start(a)?.zeta_bar,
    };
    let m = n - 1;
    let mut report = SolverReport::new(SolverStatus::MaxIterations);
    if opts.record_iterates {
        report.iterates.push(zeta.clone());
    }
    let mut prev_step: Option<f64> = None;
    for k in 1..=opts.max_iter {
        let xi = basis.bar_apply(&zeta);
        let sys = match newton_system_log(a, &xi) {
            Ok(s) => s,
            Err(Error::Overflow(_) | Error::NonFinite(_)) => return failed(a, &xi, SolverStatus::Diverged, report),
            Err(e) => return Err(e),
        };
        let grad = basis.bar_transpose_apply(&sys.gradient);
        let mut hess = vec![0.0; m * m];
        for r in 0..m {
            for c in r..m {
                let v: f64 = (0..n)
                    .map(|i| basis.b_bar(i, r) * sys.hess_diag[i] * basis.b_bar(i, c))
                    .sum();
                hess[r * m + c] = v;
                hess[c * m + r] = v;
            }
        }
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let c = match dense_solve(&hess, &rhs) {
            Ok(c) => c,
            Err(Error::SingularMatrix { .. }) => {
                report.singularity = Some(classify_dense_singularity(&sys.hess_diag));
                return failed(a, &xi, SolverStatus::SingularHessian, report);
            }
            Err(Error::NonFinite(_)) => return failed(a, &xi, SolverStatus::Diverged, report),
            Err(e) => return Err(e),
        };
        let step = norm_inf(&c);
        let rel = step / norm_inf(&zeta).max(NORM_FLOOR);
        for (z, ci) in zeta.iter_mut().zip(&c) {
            *z += ci;
        }
        report.iterations = k;
        report.last_step = rel;
        record_tail(&mut report, prev_step, step);
        prev_step = Some(step);
        if opts.record_iterates {
            report.iterates.push(zeta.clone());
        }
        if rel < opts.tol {
            report.status = SolverStatus::Converged;
            break;
        }
    }
    let xi = basis.bar_apply(&zeta);
    let p = match exp_checked(&xi) {
        Ok(p) => p,
        Err(_) => return failed(a, &xi, SolverStatus::Diverged, report),
    };
    let lambda = estimate_lambda(a, &p)?;
    Ok(Solution::finish(a, p, lambda, report))
}
