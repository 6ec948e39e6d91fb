//! Composite-step minimization.
//!
//! Each step moves from `a` along the normal `d = 1/p` of the unit-product
//! surface at the current iterate and stops where the line meets the surface
//! again: `p+ = a + t d` with `prod(a + t d) = 1`. The tangent-step minimizer
//! lies on that same line, so this is a tangent step followed by a normal
//! line search.

use crate::bisection::refine_root;
use crate::coords::initial_iterate;
use crate::error::{Error, Result};
use crate::solver::{SolveOptions, Solution, SolverReport, SolverStatus, DEFAULT_PRODUCT_TOL};
use crate::spectrum::{distance, norm_inf, prod, Spectrum};

/// Inner bisection width on the step length.
pub const INNER_TOL: f64 = 1e-12;
/// Above this dimension the bracket end `1 - prod(a)^(1/n)` is replaced by 1.
const CHEAP_BOUND_DIM: usize = 16;
/// Iterates must be on the surface to this accuracy.
const FEASIBILITY_GUARD: f64 = 1e-6;
/// Components below this are treated as zero (the normal would overflow).
const UNDERFLOW_GUARD: f64 = 1e-300;
/// Slack for the monotone-descent bookkeeping.
const DESCENT_SLACK: f64 = 1e-12;

/// One composite step from `p`. Returns the next iterate and the step length `t`.
pub fn step(a: &Spectrum, p: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = a.len();
    assert_eq!(p.len(), n, "dimension mismatch");
    if a.last() < 0.0 {
        return Err(Error::InvalidSpectrum(
            "composite steps require a non-negative spectrum".into(),
        ));
    }
    if let Some(i) = p.iter().position(|&x| !(x > UNDERFLOW_GUARD) || !x.is_finite()) {
        return Err(Error::InvalidIterate(format!(
            "component {i} = {} is not safely positive",
            p[i]
        )));
    }
    let defect = (prod(p) - 1.0).abs();
    if defect > FEASIBILITY_GUARD {
        return Err(Error::InvalidIterate(format!(
            "iterate is off the surface: |prod(p) - 1| = {defect:e}"
        )));
    }

    let d: Vec<f64> = p.iter().map(|x| 1.0 / x).collect();

    // The step is searched as t = base + s. For prod(a) >= 1 the bracket end
    // t_min = -a_j p_j zeroes component j, which is then evaluated as s d_j
    // to avoid cancelling a_j against t d_j.
    let prod_a = a.prod();
    let (base, vanishing, mut hi) = if prod_a < 1.0 {
        let t_max = if n > CHEAP_BOUND_DIM {
            1.0
        } else {
            1.0 - prod_a.powf(1.0 / n as f64)
        };
        (0.0, None, t_max)
    } else {
        let (j, t_min) = a
            .iter()
            .zip(p)
            .map(|(ai, pi)| -ai * pi)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, t)| if t > best.1 { (i, t) } else { best });
        (t_min, Some(j), -t_min)
    };
    let point = |s: f64| -> Vec<f64> {
        a.iter()
            .zip(&d)
            .enumerate()
            .map(|(i, (ai, di))| if Some(i) == vanishing { s * di } else { ai + (base + s) * di })
            .collect()
    };
    let g = |s: f64| -> f64 { point(s).iter().product::<f64>() - 1.0 };

    let mut lo = 0.0;
    let mut g_lo = g(lo);
    if g_lo == 0.0 {
        return Ok((point(lo), base + lo));
    }
    let mut g_hi = g(hi);
    // rounding can leave the theoretical upper bound a hair short
    let mut widen = 0;
    while g_hi < 0.0 && widen < 60 {
        let w = (hi - lo).max(f64::EPSILON);
        hi += w;
        g_hi = g(hi);
        widen += 1;
    }
    if g_hi == 0.0 {
        return Ok((point(hi), base + hi));
    }
    if g_hi < 0.0 || g_lo > 0.0 {
        return Err(Error::NoBracket {
            lo: base + lo,
            hi: base + hi,
        });
    }

    let mut s = 0.5 * (lo + hi);
    loop {
        let gs = g(s);
        if gs.abs() < DEFAULT_PRODUCT_TOL {
            return Ok((point(s), base + s));
        }
        if gs > 0.0 {
            hi = s;
            g_hi = gs;
        } else {
            lo = s;
            g_lo = gs;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo < INNER_TOL || mid <= lo || mid >= hi {
            break;
        }
        s = mid;
    }
    // a steep g leaves a visible defect even in a narrow bracket
    let s = refine_root(|s| Ok(g(s)), lo, g_lo, hi, g_hi, DEFAULT_PRODUCT_TOL)?;
    Ok((point(s), base + s))
}

/// Iterates composite steps from `p0` (default: the standard initial iterate)
/// until the relative change drops below `opts.tol`.
///
/// The multiplier reported is `-t` of the last step.
pub fn solve(a: &Spectrum, p0: Option<&[f64]>, opts: &SolveOptions) -> Result<Solution> {
    let mut p = match p0 {
        Some(p0) => p0.to_vec(),
        None => initial_iterate(a)?,
    };
    let mut report = SolverReport::new(SolverStatus::MaxIterations);
    if opts.record_iterates {
        report.iterates.push(p.clone());
    }
    let mut dist = distance(a, &p);
    let mut t_last = None;
    for k in 1..=opts.max_iter {
        let (p_next, t) = step(a, &p)?;
        let rel = norm_inf(
            &p_next
                .iter()
                .zip(&p)
                .map(|(x, y)| x - y)
                .collect::<Vec<_>>(),
        ) / norm_inf(&p_next);
        let dist_next = distance(a, &p_next);
        if dist_next > dist + DESCENT_SLACK {
            report.descent_violations += 1;
        }
        dist = dist_next;
        p = p_next;
        t_last = Some(t);
        report.iterations = k;
        report.last_step = rel;
        if opts.record_iterates {
            report.iterates.push(p.clone());
        }
        if rel < opts.tol {
            report.status = SolverStatus::Converged;
            break;
        }
    }
    let lambda = match t_last {
        Some(t) => -t,
        None => crate::spectrum::estimate_lambda(a, &p)?,
    };
    Ok(Solution::finish(a, p, lambda, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn step_on_the_surface_is_zero() {
        let (p, t) = step(&spec(&[2.0, 0.5]), &[1.0, 1.0]).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p, vec![2.0, 0.5]);
    }

    #[test]
    fn stationary_points_are_fixed() {
        let (p, t) = step(&spec(&[2.35, 1.9]), &[2.0, 0.5]).unwrap();
        assert_abs_diff_eq!(t, -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);

        let (p, t) = step(&spec(&[2.5, 2.5]), &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(t, -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn step_rejects_bad_iterates() {
        let a = spec(&[2.0, 1.0]);
        assert!(matches!(step(&a, &[2.0, 2.0]), Err(Error::InvalidIterate(_))));
        assert!(matches!(step(&a, &[1.0, 0.0]), Err(Error::InvalidIterate(_))));
    }

    #[test]
    fn solve_examples() {
        let r = solve(&spec(&[2.35, 1.9]), None, &SolveOptions::default()).unwrap();
        assert!(r.is_converged());
        assert_abs_diff_eq!(r.point.p[0], 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.point.p[1], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.point.lambda, 0.7, epsilon = 1e-6);

        let r = solve(&spec(&[1.875, 0.75, 0.0]), None, &SolveOptions::default()).unwrap();
        assert!(r.is_converged());
        for (x, y) in r.point.p.iter().zip([2.0, 1.0, 0.5]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-6);
        }
    }

    #[test]
    fn sits_at_the_symmetric_local_maximizer() {
        let r = solve(&spec(&[2.5, 2.5]), Some(&[1.0, 1.0]), &SolveOptions::default()).unwrap();
        assert!(r.is_converged());
        assert_eq!(r.report.iterations, 1);
        assert_abs_diff_eq!(r.point.p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.point.lambda, 1.5, epsilon = 1e-12);
    }
}
