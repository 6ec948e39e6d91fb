//! Multiplier root-finding along the explicit solution path.
//!
//! For a multiplier `mu`, the stationarity equation `p_i + mu / p_i = a_i` is
//! a quadratic in each component. Taking the `+` root everywhere gives the
//! positive branch; taking the `-` root in the last component gives the
//! negative branch. Both are stitched into one path parametrized by
//! `lambda_path in (-inf, a_n^2 / 2]`, and the constraint `prod(p) = 1` is
//! solved on it by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{SolveOptions, Solution, SolverReport, SolverStatus, DEFAULT_PRODUCT_TOL};
use crate::spectrum::{prod, Spectrum, StationaryPoint};

/// Radicands down to this value are clamped to zero.
const RADICAND_SLACK: f64 = -1e-14;
/// Bracket expansion limit for sign-flipped spectra.
const MAX_DOUBLINGS: usize = 60;
/// Cap on the regula falsi steps that finish a bisection.
const REFINE_STEPS: usize = 100;
/// Refinement width for roots found by [`scan_roots`].
const SCAN_REFINE_TOL: f64 = 1e-12;
/// Roots closer than this (in the path parameter) are merged.
const SCAN_DEDUP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda_path: f64,
    pub p: Vec<f64>,
    /// The actual multiplier. On the negative stretch this is `a_n^2/2 - lambda_path`.
    pub lambda_true: f64,
}

fn root(ai: f64, mu: f64, plus: bool) -> Result<f64> {
    let mut r = ai * ai / 4.0 - mu;
    if r < 0.0 {
        if r < RADICAND_SLACK {
            return Err(Error::Domain {
                lambda: mu,
                radicand: r,
            });
        }
        r = 0.0;
    }
    let s = r.sqrt();
    // the cancelling sign is rewritten through (ai/2 + s)(ai/2 - s) = mu
    Ok(match (plus, ai >= 0.0) {
        (true, true) => ai / 2.0 + s,
        (false, false) => ai / 2.0 - s,
        (false, true) if ai / 2.0 + s > 0.0 => mu / (ai / 2.0 + s),
        (true, false) if ai / 2.0 - s < 0.0 => mu / (ai / 2.0 - s),
        (true, _) => ai / 2.0 + s,
        (false, _) => ai / 2.0 - s,
    })
}

/// Components on one branch for the actual multiplier `mu`: all `+` roots,
/// except the last one on the negative stretch.
fn branch_point(a: &Spectrum, mu: f64, negative_stretch: bool) -> Result<Vec<f64>> {
    let n = a.len();
    a.iter()
        .enumerate()
        .map(|(i, &ai)| root(ai, mu, !(negative_stretch && i == n - 1)))
        .collect()
}

pub fn path_point(a: &Spectrum, lambda_path: f64) -> Result<PathPoint> {
    let an = a.last();
    let turn = an * an / 4.0;
    let end = an * an / 2.0;
    let negative_stretch = if an < 0.0 {
        if lambda_path > 0.0 {
            return Err(Error::Domain {
                lambda: lambda_path,
                radicand: f64::NAN,
            });
        }
        false
    } else {
        if lambda_path > end {
            return Err(Error::Domain {
                lambda: lambda_path,
                radicand: turn - (end - lambda_path),
            });
        }
        lambda_path >= turn
    };
    let mu = if negative_stretch { end - lambda_path } else { lambda_path };
    let p = branch_point(a, mu, negative_stretch)?;
    Ok(PathPoint {
        lambda_path,
        p,
        lambda_true: mu,
    })
}

fn product_defect(a: &Spectrum, lambda_path: f64) -> Result<f64> {
    Ok(prod(&path_point(a, lambda_path)?.p) - 1.0)
}

/// Finds a multiplier with `prod(P(lambda)) = 1` by bisection.
///
/// For `prod(a) < 1` the root is searched on `[-1, 0]` (the left end is
/// doubled outward only for sign-flipped spectra), otherwise on `[0, a_n^2/2]`.
pub fn solve(a: &Spectrum, opts: &SolveOptions) -> Result<Solution> {
    let prod_a = a.prod();
    let (mut lo, hi) = if prod_a < 1.0 {
        (-1.0, 0.0)
    } else {
        (0.0, a.last() * a.last() / 2.0)
    };
    let mut f_lo = product_defect(a, lo)?;
    if prod_a < 1.0 {
        let mut doublings = 0;
        while f_lo < 0.0 {
            if doublings == MAX_DOUBLINGS {
                return Err(Error::NoBracket { lo, hi });
            }
            lo *= 2.0;
            f_lo = product_defect(a, lo)?;
            doublings += 1;
        }
    }
    let f_hi = product_defect(a, hi)?;
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }

    let mut report = SolverReport::new(SolverStatus::Converged);
    report.bracket = Some((lo, hi));

    let (mut hi, mut f_hi) = (hi, f_hi);
    let mut bracketed = false;
    let lambda = if f_lo == 0.0 {
        lo
    } else if f_hi == 0.0 {
        hi
    } else {
        // invariant: defect(lo) > 0 > defect(hi)
        let mut found = None;
        while hi - lo >= opts.tol {
            let mid = 0.5 * (lo + hi);
            report.iterations += 1;
            if opts.record_iterates {
                report.iterates.push(vec![mid]);
            }
            let fm = product_defect(a, mid)?;
            if fm.abs() < DEFAULT_PRODUCT_TOL {
                found = Some(mid);
                break;
            }
            if fm > 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
        bracketed = found.is_none();
        found.unwrap_or(0.5 * (lo + hi))
    };
    report.last_step = hi - lo;

    let an = a.last();
    let end = an * an / 2.0;
    if bracketed && an >= 0.0 && lo >= an * an / 4.0 {
        // On the negative stretch the multiplier is end - lambda_path, which
        // the path parameter resolves only to eps * end; finish in mu itself.
        let defect = |mu: f64| Ok(prod(&branch_point(a, mu, true)?) - 1.0);
        let mu = refine_root(defect, end - hi, f_hi, end - lo, f_lo, DEFAULT_PRODUCT_TOL)?;
        let p = branch_point(a, mu, true)?;
        return Ok(Solution::finish(a, p, mu, report));
    }
    let lambda = if bracketed {
        refine_root(|l| product_defect(a, l), lo, f_lo, hi, f_hi, DEFAULT_PRODUCT_TOL)?
    } else {
        lambda
    };
    let pp = path_point(a, lambda)?;
    Ok(Solution::finish(a, pp.p, pp.lambda_true, report))
}

/// Root of `f` inside a sign-changing bracket by the Illinois variant of
/// regula falsi, stopping once `|f| < target`. Returns the best point seen.
///
/// Used to finish a bisection whose bracket is narrow in the argument but not
/// in the value, which happens when the root sits next to a steep branch.
pub(crate) fn refine_root<F>(mut f: F, mut lo: f64, mut f_lo: f64, mut hi: f64, mut f_hi: f64, target: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    if f_lo * f_hi > 0.0 {
        return Ok(best.0);
    }
    let mut side = 0i8;
    for _ in 0..REFINE_STEPS {
        if best.1.abs() < target {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        if x <= lo || x >= hi {
            break;
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            break;
        }
        if (fx > 0.0) == (f_lo > 0.0) {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(best.0)
}

/// Upper bound on bisection iterations for an initial bracket of the given width.
pub fn iteration_bound(width: f64, tol: f64) -> usize {
    if width <= tol {
        return 1;
    }
    (width / tol).log2().ceil() as usize + 1
}

/// All roots of `prod(P(lambda)) = 1` on `[0, a_n^2/2]`, found by sampling
/// `grid` points and refining every sign change.
pub fn scan_roots(a: &Spectrum, grid: usize) -> Result<Vec<StationaryPoint>> {
    if grid < 100 {
        return Err(Error::InvalidArgument(format!("grid must be at least 100, got {grid}")));
    }
    if a.prod() < 1.0 {
        return Err(Error::InvalidArgument(
            "root scan requires prod(a) >= 1".into(),
        ));
    }
    let end = a.last() * a.last() / 2.0;
    let step = end / (grid - 1) as f64;
    let nodes: Vec<f64> = (0..grid)
        .map(|k| if k == grid - 1 { end } else { k as f64 * step })
        .collect();
    let values = nodes
        .iter()
        .map(|&l| product_defect(a, l))
        .collect::<Result<Vec<_>>>()?;

    let mut roots: Vec<f64> = Vec::new();
    for k in 0..grid {
        if values[k] == 0.0 {
            roots.push(nodes[k]);
            continue;
        }
        if k + 1 < grid && values[k] * values[k + 1] < 0.0 {
            let (mut lo, mut hi) = (nodes[k], nodes[k + 1]);
            let f_lo_positive = values[k] > 0.0;
            while hi - lo > SCAN_REFINE_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = product_defect(a, mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > 0.0) == f_lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() < SCAN_DEDUP);

    roots
        .into_iter()
        .map(|l| {
            let pp = path_point(a, l)?;
            StationaryPoint::new(a, pp.p, pp.lambda_true)
        })
        .collect()
}
