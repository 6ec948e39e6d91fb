//! The diagonal problem: points of `R^n`, the unit-product constraint and
//! first-order optimality of `1/2 |p - a|^2` subject to `prod(p) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, MatrixN};

/// Sorted (non-increasing) target point of the diagonal projection problem.
///
/// All entries are non-negative except possibly the last one, which is
/// negative only for spectra built with [`Spectrum::sign_flipped`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    sign_flipped: bool,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::validate(&values, false)?;
        Ok(Self {
            values,
            sign_flipped: false,
        })
    }

    /// Spectrum of a matrix with negative determinant: the smallest singular
    /// value has been negated so that the product constraint stays `+1`.
    pub fn sign_flipped(values: Vec<f64>) -> Result<Self> {
        Self::validate(&values, true)?;
        Ok(Self {
            values,
            sign_flipped: true,
        })
    }

    fn validate(values: &[f64], allow_negative_last: bool) -> Result<()> {
        let n = values.len();
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpectrum(format!(
                "values are not sorted non-increasing: {values:?}"
            )));
        }
        if values[n - 2] < 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "only the last entry may be negative: {values:?}"
            )));
        }
        if values[n - 1] < 0.0 && !allow_negative_last {
            return Err(Error::InvalidSpectrum(format!(
                "negative last entry requires a sign-flipped spectrum: {values:?}"
            )));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sign_flipped(&self) -> bool {
        self.sign_flipped
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn prod(&self) -> f64 {
        prod(&self.values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Deref for Spectrum {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Candidate solution of the diagonal problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub p: Vec<f64>,
    pub lambda: f64,
    /// `|p - a + lambda / p|_inf`
    pub residual: f64,
}

impl StationaryPoint {
    pub fn new(a: &[f64], p: Vec<f64>, lambda: f64) -> Result<Self> {
        let residual = stationarity_residual(a, &p, lambda)?;
        Ok(Self { p, lambda, residual })
    }

    pub fn feasibility(&self) -> f64 {
        (prod(&self.p) - 1.0).abs()
    }
}

/// Product of all entries, accumulated left to right.
pub fn prod(x: &[f64]) -> f64 {
    x.iter().fold(1.0, |acc, v| acc * v)
}

/// `1/2 |a - p|^2`
pub fn distance(a: &[f64], p: &[f64]) -> f64 {
    0.5 * a.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn stationarity_residual(a: &[f64], p: &[f64], lambda: f64) -> Result<f64> {
    assert_eq!(a.len(), p.len(), "dimension mismatch");
    if let Some(i) = p.iter().position(|&x| x == 0.0) {
        return Err(Error::DivisionByZero(i));
    }
    Ok(a
        .iter()
        .zip(p)
        .map(|(ai, pi)| (pi - ai + lambda / pi).abs())
        .fold(0.0, f64::max))
}

/// Least-squares multiplier `<a - p, 1/p> / <1/p, 1/p>`.
pub fn estimate_lambda(a: &[f64], p: &[f64]) -> Result<f64> {
    assert_eq!(a.len(), p.len(), "dimension mismatch");
    if let Some(i) = p.iter().position(|&x| x == 0.0) {
        return Err(Error::DivisionByZero(i));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (ai, pi) in a.iter().zip(p) {
        let inv = 1.0 / pi;
        num += (ai - pi) * inv;
        den += inv * inv;
    }
    Ok(num / den)
}

/// Stable descending sort. `perm[k]` is the source index of `sorted[k]`.
pub fn sort_to_cone(sigma: &[f64]) -> Result<(Spectrum, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..sigma.len()).collect();
    perm.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let sorted: Vec<f64> = perm.iter().map(|&k| sigma[k]).collect();
    Ok((Spectrum::new(sorted)?, perm))
}

/// The naive projection `A * det(A)^(-1/n)`.
pub fn radial_scale(a: &MatrixN) -> Result<MatrixN> {
    let n = a.n();
    let d = det(a);
    if d == 0.0 {
        return Err(Error::SingularInput);
    }
    if d < 0.0 && n.is_multiple_of(2) {
        return Err(Error::NoRealRoot(n));
    }
    let s = d.signum() * d.abs().powf(-1.0 / n as f64);
    Ok(a.scale(s))
}
