//! Logarithmic and hyperbolic coordinates on the unit-product surface.
//!
//! With `xi = log x`, the constraint `prod(x) = 1` becomes `sum(xi) = 0`.
//! Writing `xi = B * zeta` in the basis below turns that hyperplane into
//! `zeta_n = 0`, and the order cone into the positive orthant of the first
//! `n - 1` coordinates.

use crate::error::{Error, Result};
use crate::linalg::{svd, MatrixN};
use crate::spectrum::{prod, Spectrum};

/// Largest `|xi_i|` accepted before `exp` is considered to overflow.
pub const MAX_LOG_COORD: f64 = 700.0;

/// Shift added to every component before the radial scaling of the initial iterate.
const INITIAL_SHIFT: f64 = 1e-15;

/// Spanning vectors of the hyperbolic coordinate system and the inverse transform.
///
/// Column `j < n-1` of `B` is `b_j - (j+1) * 1`, where `b_j` has `n` in its
/// first `j+1` entries and zeros elsewhere; the last column is all ones.
#[derive(Debug, Clone)]
pub struct HyperbolicBasis {
    n: usize,
    b: MatrixN,
    b_inv: MatrixN,
}

/// Hyperbolic coordinates with the last one (`zeta_n`) fixed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HypPoint {
    pub zeta_bar: Vec<f64>,
}

pub fn build_basis(n: usize) -> HyperbolicBasis {
    HyperbolicBasis::new(n)
}

impl HyperbolicBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "hyperbolic basis needs n >= 2");
        let nf = n as f64;
        let b = MatrixN::from_fn_unchecked(n, |i, j| {
            if j == n - 1 {
                1.0
            } else if i <= j {
                nf - (j + 1) as f64
            } else {
                -((j + 1) as f64)
            }
        });
        let b_inv = MatrixN::from_fn_unchecked(n, |i, j| {
            if i == n - 1 || j == i {
                1.0 / nf
            } else if j == i + 1 {
                -1.0 / nf
            } else {
                0.0
            }
        });
        Self { n, b, b_inv }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> &MatrixN {
        &self.b
    }

    pub fn b_inv(&self) -> &MatrixN {
        &self.b_inv
    }

    /// Entry `(i, j)` of the `n x (n-1)` block `B_bar`.
    #[inline]
    pub fn b_bar(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j + 1 < self.n);
        self.b.get(i, j)
    }

    /// `xi = B_bar * zeta_bar`
    pub fn bar_apply(&self, zeta_bar: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(zeta_bar.len(), n - 1);
        (0..n)
            .map(|i| (0..n - 1).map(|j| self.b_bar(i, j) * zeta_bar[j]).sum())
            .collect()
    }

    /// `B_bar^T * v`
    pub fn bar_transpose_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(v.len(), n);
        (0..n - 1)
            .map(|j| (0..n).map(|i| self.b_bar(i, j) * v[i]).sum())
            .collect()
    }

    /// `zeta = B^{-1} xi`, split into `(zeta_bar, zeta_n)`.
    pub fn to_hyperbolic(&self, xi: &[f64]) -> (HypPoint, f64) {
        let n = self.n;
        assert_eq!(xi.len(), n);
        let mut zeta_bar = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            zeta_bar.push((xi[i] - xi[i + 1]) / n as f64);
        }
        let zeta_n = xi.iter().sum::<f64>() / n as f64;
        (HypPoint { zeta_bar }, zeta_n)
    }

    /// Spectral condition number of `B`.
    pub fn condition_number(&self) -> f64 {
        let s = svd(&self.b).expect("SVD of the hyperbolic basis");
        s.sigma[0] / s.sigma[self.n - 1]
    }
}

/// Hyperbolic coordinates of a positive vector, plus `zeta_n = log(prod x) / n`.
pub fn hyp_from_euclidean(x: &[f64]) -> Result<(HypPoint, f64)> {
    if let Some(i) = x.iter().position(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::NonPositiveInput(i));
    }
    let xi: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    Ok(HyperbolicBasis::new(x.len()).to_hyperbolic(&xi))
}

/// `exp(B_bar * zeta_bar)`, a point with unit product.
pub fn euclidean_from_hyp(point: &HypPoint) -> Result<Vec<f64>> {
    let basis = HyperbolicBasis::new(point.zeta_bar.len() + 1);
    euclidean_from_hyp_with(&basis, point)
}

pub fn euclidean_from_hyp_with(basis: &HyperbolicBasis, point: &HypPoint) -> Result<Vec<f64>> {
    let xi = basis.bar_apply(&point.zeta_bar);
    exp_checked(&xi)
}

pub(crate) fn exp_checked(xi: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = xi.iter().find(|v| !v.is_finite() || v.abs() > MAX_LOG_COORD) {
        return Err(Error::Overflow(format!("log coordinate {v} out of range")));
    }
    Ok(xi.iter().map(|v| v.exp()).collect())
}

/// Initial iterate on the unit-product surface for the iterative solvers.
///
/// Points below the tangent plane at `1` are first projected onto it; the
/// result is scaled radially onto the surface and then moved along the
/// surface (`p <- exp(gamma log p)`) until its first entry matches `a_1`.
pub fn initial_iterate(a: &Spectrum) -> Result<Vec<f64>> {
    if a.is_sign_flipped() || a.last() < 0.0 {
        return Err(Error::InvalidSpectrum(
            "initial iterate requires a non-negative spectrum".into(),
        ));
    }
    let n = a.len() as f64;
    let mut target: Vec<f64> = a.to_vec();
    let excess: f64 = target.iter().map(|v| v - 1.0).sum();
    if excess < 0.0 {
        let mean = target.iter().sum::<f64>() / n;
        for v in target.iter_mut() {
            *v = 1.0 + *v - mean;
        }
    }
    let shifted: Vec<f64> = target.iter().map(|v| v + INITIAL_SHIFT).collect();
    let scale = prod(&shifted).powf(-1.0 / n);
    let mut p0: Vec<f64> = shifted.iter().map(|v| v * scale).collect();
    if p0[0] > 1.0 {
        let gamma = target[0].ln() / p0[0].ln();
        for v in p0.iter_mut() {
            *v = (gamma * v.ln()).exp();
        }
    }
    Ok(p0)
}
