//! First derivative of the projection map.
//!
//! Differentiating `P - A + lambda grad det(P) = 0`, `det P = 1` and rotating
//! with the singular vectors of `P = U Sigma V^T` gives, for
//! `dP = U dY V^T` and `R = U^T dA V`,
//!
//! ```text
//! dY - lambda Sigma^{-1} dY^T Sigma^{-1} + d_eta Sigma^{-1} = R
//! sum_i dY_ii / Sigma_i = 0
//! ```
//!
//! The entries `(i, j)` and `(j, i)` only couple with each other, and the
//! diagonal couples only through `d_eta`, so the system is solved pair by
//! pair. A dense assembly of the same system is kept as a reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, IllPosedReason, Result};
use crate::linalg::{dense_solve, det, inverse, MatrixN};
use crate::projector::ProjectionResult;

/// Relative distance to a forbidden value below which the system is rejected.
pub const WELL_POSED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityMode {
    /// Pairwise closed-form solve, `O(n^2)`.
    Block,
    /// Gaussian elimination on the assembled `(n^2 + 1)`-dimensional system.
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySolution {
    pub delta_y: MatrixN,
    pub delta_eta: f64,
    /// `U dY V^T`; equal to `delta_y` until rotated by [`projection_derivative`].
    pub delta_p: MatrixN,
    pub delta_lambda: f64,
}

/// `X - lambda Sigma^{-1} X^T Sigma^{-1}`.
pub fn apply_s(sigma: &[f64], lambda: f64, x: &MatrixN) -> MatrixN {
    let n = x.n();
    assert_eq!(sigma.len(), n, "dimension mismatch");
    MatrixN::from_fn_unchecked(n, |i, j| x.get(i, j) - lambda * x.get(j, i) / (sigma[i] * sigma[j]))
}

/// Directional derivative of `grad det` at `P` in direction `X`.
pub fn dnabla_det(p: &MatrixN, x: &MatrixN) -> Result<MatrixN> {
    let d = det(p);
    if d == 0.0 {
        return Err(Error::SingularInput);
    }
    let inv = inverse(p).map_err(|_| Error::SingularInput)?;
    let inv_t = inv.transpose();
    let tr = inv.matmul(x).trace();
    let second = inv_t.matmul(&x.transpose()).matmul(&inv_t);
    Ok(&inv_t.scale(d * tr) - &second.scale(d))
}

/// Checks the three solvability conditions of the sensitivity system.
pub fn check_well_posed(sigma: &[f64], lambda: f64) -> Result<()> {
    let n = sigma.len();
    for &s in sigma {
        let s2 = s * s;
        if (lambda - s2).abs() <= WELL_POSED_TOL * s2 {
            return Err(Error::IllPosed(IllPosedReason::LambdaEqSigmaSq));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let sp = sigma[i] * sigma[j];
            if (lambda - sp).abs() <= WELL_POSED_TOL * sp || (lambda + sp).abs() <= WELL_POSED_TOL * sp {
                return Err(Error::IllPosed(IllPosedReason::LambdaEqPmSigmaProd));
            }
        }
    }
    let (sum, abs_sum) = sigma.iter().fold((0.0, 0.0), |(s, a), &si| {
        let t = 1.0 / (si * si - lambda);
        (s + t, a + t.abs())
    });
    if sum.abs() <= WELL_POSED_TOL * abs_sum {
        return Err(Error::IllPosed(IllPosedReason::TraceZero));
    }
    Ok(())
}

/// Solves the diagonalized sensitivity system for `(dY, d_eta)`.
pub fn solve_sensitivity(
    sigma: &[f64],
    lambda: f64,
    r: &MatrixN,
    mode: SensitivityMode,
) -> Result<SensitivitySolution> {
    let n = r.n();
    if sigma.len() != n {
        return Err(Error::Shape {
            expected: n,
            actual: sigma.len(),
        });
    }
    if let Some(i) = sigma.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::NonPositiveInput(i));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    check_well_posed(sigma, lambda)?;
    let (delta_y, delta_eta) = match mode {
        SensitivityMode::Block => block_solve(sigma, lambda, r),
        SensitivityMode::Dense => dense_reference(sigma, lambda, r)?,
    };
    Ok(SensitivitySolution {
        delta_p: delta_y.clone(),
        delta_y,
        delta_eta,
        delta_lambda: delta_eta,
    })
}

fn block_solve(sigma: &[f64], lambda: f64, r: &MatrixN) -> (MatrixN, f64) {
    let n = r.n();
    let mut y = MatrixN::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let c = lambda / (sigma[i] * sigma[j]);
            let det = 1.0 - c * c;
            let (rij, rji) = (r.get(i, j), r.get(j, i));
            y.set(i, j, (rij + c * rji) / det);
            y.set(j, i, (rji + c * rij) / det);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &s) in sigma.iter().enumerate() {
        let q = 1.0 / (s * s - lambda);
        num += r.get(i, i) * s * q;
        den += q;
    }
    let eta = num / den;
    for (i, &s) in sigma.iter().enumerate() {
        y.set(i, i, (r.get(i, i) - eta / s) / (1.0 - lambda / (s * s)));
    }
    (y, eta)
}

fn dense_reference(sigma: &[f64], lambda: f64, r: &MatrixN) -> Result<(MatrixN, f64)> {
    let n = r.n();
    let m = n * n + 1;
    let idx = |i: usize, j: usize| i * n + j;
    let mut a = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            rhs[row] = r.get(i, j);
            a[row * m + idx(i, j)] += 1.0;
            a[row * m + idx(j, i)] -= lambda / (sigma[i] * sigma[j]);
            if i == j {
                // lambda tr(Sigma^{-1} dY) Sigma^{-1}
                for k in 0..n {
                    a[row * m + idx(k, k)] += lambda / (sigma[i] * sigma[k]);
                }
                a[row * m + n * n] = 1.0 / sigma[i];
            }
        }
    }
    for k in 0..n {
        a[n * n * m + idx(k, k)] = 1.0 / sigma[k];
    }
    let x = dense_solve(&a, &rhs)?;
    let y = MatrixN::from_fn_unchecked(n, |i, j| x[idx(i, j)]);
    Ok((y, x[n * n]))
}

/// Max-norm residual of the diagonalized system, relative to `1 + |R|_inf`.
pub fn sensitivity_residual(sigma: &[f64], lambda: f64, r: &MatrixN, sol: &SensitivitySolution) -> f64 {
    let n = r.n();
    let s = apply_s(sigma, lambda, &sol.delta_y);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let eta = if i == j { sol.delta_eta / sigma[i] } else { 0.0 };
            worst = worst.max((s.get(i, j) + eta - r.get(i, j)).abs());
        }
    }
    let constraint: f64 = (0..n).map(|i| sol.delta_y.get(i, i) / sigma[i]).sum();
    worst.max(constraint.abs()) / (1.0 + r.max_abs())
}

/// Derivative `(dP, d_lambda)` of the projection of `a` in direction `delta_a`.
pub fn projection_derivative(a: &MatrixN, delta_a: &MatrixN, proj: &ProjectionResult) -> Result<SensitivitySolution> {
    let n = a.n();
    if delta_a.n() != n || proj.p_matrix.n() != n {
        return Err(Error::Shape {
            expected: n * n,
            actual: delta_a.n() * delta_a.n(),
        });
    }
    if proj.sign_flipped {
        return Err(Error::DegenerateProjection(
            "derivative is not available for inputs with negative determinant".into(),
        ));
    }
    if proj.p_diag.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::DegenerateProjection(
            "projected singular values must be positive".into(),
        ));
    }
    let r = proj.u.transpose().matmul(delta_a).matmul(&proj.v);
    let mut sol = solve_sensitivity(&proj.p_diag, proj.lambda, &r, SensitivityMode::Block)?;
    sol.delta_p = proj.u.matmul(&sol.delta_y).matmul(&proj.v.transpose());
    Ok(sol)
}

/// Solves the undiagonalized system
/// `dP + lambda D(grad det)(P)[dP] + d_lambda grad det(P) = dA`,
/// `grad det(P) : dP = 0` densely in `n^2 + 1` unknowns.
pub fn matrix_level_derivative(p: &MatrixN, lambda: f64, delta_a: &MatrixN) -> Result<(MatrixN, f64)> {
    let n = p.n();
    let m = n * n + 1;
    let d = det(p);
    let grad = inverse(p).map_err(|_| Error::SingularInput)?.transpose().scale(d);
    let mut a = vec![0.0; m * m];
    for col in 0..n * n {
        let mut e = MatrixN::zeros(n);
        e.set(col / n, col % n, 1.0);
        let image = &e + &dnabla_det(p, &e)?.scale(lambda);
        for row in 0..n * n {
            a[row * m + col] = image.as_slice()[row];
        }
        a[n * n * m + col] = grad.as_slice()[col];
    }
    for row in 0..n * n {
        a[row * m + n * n] = grad.as_slice()[row];
    }
    let mut rhs = delta_a.as_slice().to_vec();
    rhs.push(0.0);
    let x = dense_solve(&a, &rhs)?;
    let dp = MatrixN::from_fn_unchecked(n, |i, j| x[i * n + j]);
    Ok((dp, x[n * n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> MatrixN {
        MatrixN::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn apply_s_examples() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(apply_s(&[1.0, 1.0], 0.0, &x), x);
        assert_eq!(apply_s(&[1.0, 1.0], 1.0, &x), m(&[&[0.0, -1.0], &[1.0, 0.0]]));
        let y = apply_s(&[2.0, 0.5], 0.7, &m(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_abs_diff_eq!(y.get(0, 1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.get(1, 0), -0.7, epsilon = 1e-15);
        assert_eq!(y.get(0, 0), 0.0);
    }

    #[test]
    fn dnabla_det_examples() {
        let x = m(&[&[1.0, 2.0, 0.5], &[-1.0, 3.0, 0.0], &[0.2, 0.0, -2.0]]);
        let got = dnabla_det(&MatrixN::identity(3), &x).unwrap();
        let expected = &MatrixN::identity(3).scale(x.trace()) - &x.transpose();
        assert!((&got - &expected).max_abs() < 1e-15);

        let got = dnabla_det(&MatrixN::from_diag(&[2.0, 0.5]).unwrap(), &MatrixN::identity(2)).unwrap();
        assert!((&got - &MatrixN::identity(2)).max_abs() < 1e-15);

        assert!(matches!(
            dnabla_det(&m(&[&[1.0, 2.0], &[2.0, 4.0]]), &MatrixN::identity(2)),
            Err(Error::SingularInput)
        ));
    }

    #[test]
    fn sensitivity_examples() {
        for mode in [SensitivityMode::Block, SensitivityMode::Dense] {
            let s = solve_sensitivity(&[1.0, 1.0], 0.0, &MatrixN::identity(2), mode).unwrap();
            assert_abs_diff_eq!(s.delta_eta, 1.0, epsilon = 1e-14);
            assert!(s.delta_y.max_abs() < 1e-14);

            let r = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
            let s = solve_sensitivity(&[2.0, 0.5], 0.7, &r, mode).unwrap();
            assert_abs_diff_eq!(s.delta_y.get(0, 1), 1.0 / 0.51, epsilon = 1e-12);
            assert_abs_diff_eq!(s.delta_y.get(1, 0), 0.7 / 0.51, epsilon = 1e-12);
            assert_abs_diff_eq!(s.delta_y.get(0, 0), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.delta_eta, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ill_posed_guards() {
        let r = MatrixN::identity(2);
        let reason = |sigma: &[f64], lambda| match solve_sensitivity(sigma, lambda, &r, SensitivityMode::Block) {
            Err(Error::IllPosed(reason)) => Some(reason),
            _ => None,
        };
        assert_eq!(reason(&[2.0, 0.5], 1.0), Some(IllPosedReason::LambdaEqPmSigmaProd));
        assert_eq!(reason(&[2.0, 0.5], 0.25), Some(IllPosedReason::LambdaEqSigmaSq));
        // 1/(4 - l) + 1/(0.25 - l) = 0 at l = 2.125
        assert_eq!(reason(&[2.0, 0.5], 2.125), Some(IllPosedReason::TraceZero));
    }

    #[test]
    fn block_and_dense_agree() {
        let sigma = [3.0, 1.2, 0.9, 0.3];
        let r = MatrixN::from_fn(4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * i as f64).unwrap();
        let b = solve_sensitivity(&sigma, 0.4, &r, SensitivityMode::Block).unwrap();
        let d = solve_sensitivity(&sigma, 0.4, &r, SensitivityMode::Dense).unwrap();
        assert!((&b.delta_y - &d.delta_y).max_abs() < 1e-12);
        assert_abs_diff_eq!(b.delta_eta, d.delta_eta, epsilon = 1e-12);
        assert!(sensitivity_residual(&sigma, 0.4, &r, &b) < 1e-14);
    }

    #[test]
    fn identity_derivative_is_tangential_projection() {
        let a = MatrixN::identity(2);
        let proj = crate::projector::project(&a, None, &Default::default()).unwrap();
        let da = m(&[&[0.3, -1.0], &[2.0, 0.5]]);
        let sol = projection_derivative(&a, &da, &proj).unwrap();
        let expected = &da - &MatrixN::identity(2).scale(da.trace() / 2.0);
        assert!((&sol.delta_p - &expected).max_abs() < 1e-12);
    }
}
