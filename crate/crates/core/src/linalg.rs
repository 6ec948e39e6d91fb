//! Dense linear algebra for small square matrices.
//!
//! Everything here works on [`MatrixN`], a row-major `n x n` matrix of finite
//! `f64` values. The SVD is a one-sided (Hestenes) Jacobi iteration, which is
//! accurate and simple for the sizes this crate targets (`n <= 64`).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`dense_solve`].
pub const DEFAULT_PIVOT_TOL: f64 = 1e-14;

/// Maximum number of Jacobi sweeps before [`svd`] gives up.
pub const DEFAULT_MAX_SWEEPS: usize = 80;

/// Square real matrix, row-major, all entries finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct MatrixN {
    n: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for MatrixN {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        MatrixN::new(raw.n, raw.data)
    }
}

impl fmt::Debug for MatrixN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixN({}x{}) [", self.n, self.n)?;
        for row in self.data.chunks(self.n) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl MatrixN {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if data.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from a closure without validating finiteness.
    ///
    /// Callers inside the crate use this for intermediate products whose
    /// finiteness follows from finite inputs of bounded size.
    pub(crate) fn from_fn_unchecked(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let m = Self::from_fn_unchecked(n, f);
        Self::new(m.n, m.data)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 2, "MatrixN requires n >= 2");
        Self::from_fn_unchecked(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "MatrixN requires n >= 2");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds a matrix from rows; all rows must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn_unchecked(self.n, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &MatrixN) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matmul");
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &aik) in row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += aik * b;
                }
            }
        }
        Self { n, data: out }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `U * diag(d) * V^T`.
    pub fn compose(u: &MatrixN, d: &[f64], v: &MatrixN) -> Self {
        let n = u.n;
        assert_eq!(d.len(), n);
        Self::from_fn_unchecked(n, |i, j| {
            (0..n).map(|k| u.get(i, k) * d[k] * v.get(j, k)).sum()
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

impl Add for &MatrixN {
    type Output = MatrixN;

    fn add(self, rhs: &MatrixN) -> MatrixN {
        assert_eq!(self.n, rhs.n);
        MatrixN {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &MatrixN {
    type Output = MatrixN;

    fn sub(self, rhs: &MatrixN) -> MatrixN {
        assert_eq!(self.n, rhs.n);
        MatrixN {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &MatrixN {
    type Output = MatrixN;

    fn mul(self, rhs: &MatrixN) -> MatrixN {
        self.matmul(rhs)
    }
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// `A = U * diag(sigma) * V^T` with `sigma` sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: MatrixN,
    pub v: MatrixN,
    pub sigma: Vec<f64>,
    /// `det(U) * det(V)`, rounded to +1 or -1.
    pub sign: i32,
}

#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    /// Off-diagonal threshold relative to the column norms.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: f64::EPSILON,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

pub fn svd(a: &MatrixN) -> Result<SvdResult> {
    svd_with(a, SvdOptions::default())
}

/// One-sided Jacobi SVD.
///
/// Columns of a working copy `W = A` are rotated pairwise until they are
/// mutually orthogonal; the accumulated rotations form `V`, the column norms
/// are the singular values and the normalized columns form `U`.
pub fn svd_with(a: &MatrixN, opts: SvdOptions) -> Result<SvdResult> {
    let n = a.n();
    let tol = opts.tol * n as f64;
    // column-major working storage
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let fro = a.frobenius_norm();
    let negligible = (tol * fro) * (tol * fro);
    let mut converged = false;
    for _sweep in 0..opts.max_sweeps {
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (alpha, beta, gamma) = {
                    let (wi, wj) = (&w[i], &w[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..n {
                        alpha += wi[k] * wi[k];
                        beta += wj[k] * wj[k];
                        gamma += wi[k] * wj[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || alpha <= negligible || beta <= negligible {
                    continue;
                }
                if gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: opts.max_sweeps,
        });
    }

    let norms: Vec<f64> = w.iter().map(|col| norm2(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal singular values keep their column order
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let sigma_max = sigma[0];
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    // Same threshold as the sweep skip: columns below it were never rotated
    // against each other, so their directions carry no information.
    let cutoff = (tol * sigma_max).max(tol * fro);
    for (pos, &k) in order.iter().enumerate() {
        let mut col = vec![0.0; n];
        let mut keep = sigma[pos] > cutoff && sigma[pos] > f64::MIN_POSITIVE;
        if keep {
            col = w[k].iter().map(|x| x / sigma[pos]).collect();
            // rounding in A v / sigma grows as sigma shrinks; re-orthogonalize
            for _ in 0..2 {
                for prev in u_cols.iter().take(pos) {
                    let d: f64 = prev.iter().zip(&col).map(|(a, b)| a * b).sum();
                    for (ci, pi) in col.iter_mut().zip(prev) {
                        *ci -= d * pi;
                    }
                }
            }
            let nc = norm2(&col);
            keep = nc > 0.5;
            col.iter_mut().for_each(|c| *c /= nc);
        }
        if keep {
            u_cols.push(col);
        } else {
            u_cols.push(vec![0.0; n]);
            deficient.push(pos);
        }
    }
    complete_orthonormal(&mut u_cols, &deficient);
    let v_cols: Vec<&Vec<f64>> = order.iter().map(|&k| &v[k]).collect();

    let u = MatrixN::from_fn_unchecked(n, |i, j| u_cols[j][i]);
    let v = MatrixN::from_fn_unchecked(n, |i, j| v_cols[j][i]);
    let sign = (det(&u) * det(&v)).signum() as i32;
    Ok(SvdResult {
        u,
        v,
        sigma,
        sign: if sign == 0 { 1 } else { sign },
    })
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let yj = *y;
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow/underflow for extreme columns
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

/// Fills the columns listed in `missing` with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let n = cols.len();
    let mut filled: Vec<bool> = (0..n).map(|k| !missing.contains(&k)).collect();
    let mut candidate = 0;
    for &slot in missing {
        while candidate < n {
            let mut x = vec![0.0; n];
            x[candidate] = 1.0;
            candidate += 1;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if !filled[k] {
                        continue;
                    }
                    let d: f64 = col.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, ci) in x.iter_mut().zip(col) {
                        *xi -= d * ci;
                    }
                }
            }
            let nx = norm2(&x);
            if nx > 1e-3 {
                cols[slot] = x.iter().map(|v| v / nx).collect();
                filled[slot] = true;
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// LU, determinant, solve
// ---------------------------------------------------------------------------

struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    parity: f64,
}

/// In-place LU with partial pivoting. Returns `Err(column)` when a pivot
/// falls to or below `pivot_floor` in magnitude.
fn lu_factor(n: usize, mut a: Vec<f64>, pivot_floor: f64) -> std::result::Result<Lu, (usize, f64)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= pivot_floor {
            return Err((k, pmax));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            parity = -parity;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            a[i * n + k] = f;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    Ok(Lu {
        n,
        lu: a,
        perm,
        parity,
    })
}

impl Lu {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Determinant via LU with partial pivoting; exactly 0 when a pivot is 0.
pub fn det(a: &MatrixN) -> f64 {
    let n = a.n();
    match lu_factor(n, a.as_slice().to_vec(), 0.0) {
        Ok(lu) => (0..n).fold(lu.parity, |d, i| d * lu.lu[i * n + i]),
        Err(_) => 0.0,
    }
}

/// Solves `M x = rhs` for a row-major `n x n` coefficient array.
pub fn dense_solve(m: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    dense_solve_with(m, rhs, DEFAULT_PIVOT_TOL)
}

pub fn dense_solve_with(m: &[f64], rhs: &[f64], pivot_tol: f64) -> Result<Vec<f64>> {
    let n = rhs.len();
    if m.len() != n * n {
        return Err(Error::Shape {
            expected: n * n,
            actual: m.len(),
        });
    }
    if let Some(pos) = m.iter().chain(rhs).position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let norm = m
        .chunks(n.max(1))
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = lu_factor(n, m.to_vec(), pivot_tol * norm)
        .map_err(|(column, pivot)| Error::SingularMatrix { column, pivot })?;
    Ok(lu.solve(rhs))
}

pub(crate) fn inverse(a: &MatrixN) -> Result<MatrixN> {
    let n = a.n();
    let norm = a.norm_inf();
    let lu = lu_factor(n, a.as_slice().to_vec(), DEFAULT_PIVOT_TOL * norm)
        .map_err(|(column, pivot)| Error::SingularMatrix { column, pivot })?;
    let mut out = MatrixN::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = lu.solve(&e);
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaled Frobenius norm threshold for the Padé core.
const EXPM_SCALED_NORM: f64 = 0.5;

/// Matrix exponential by scaling and squaring with a degree-13 Padé core.
pub fn expm(t: &MatrixN) -> Result<MatrixN> {
    // det exp(T) = exp(tr T) must be representable
    let tr = t.trace();
    if tr > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "exp(tr T) = exp({tr}) exceeds the floating-point range"
        )));
    }
    let norm = t.frobenius_norm();
    let mut squarings = 0u32;
    if norm > EXPM_SCALED_NORM {
        squarings = (norm / EXPM_SCALED_NORM).log2().ceil() as u32;
    }
    let scaled = t.scale(0.5f64.powi(squarings as i32));
    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.is_finite() {
        return Err(Error::Overflow("matrix exponential overflowed".into()));
    }
    Ok(result)
}

fn pade13(a: &MatrixN) -> Result<MatrixN> {
    let n = a.n();
    let b = &PADE13;
    let id = MatrixN::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> MatrixN {
        MatrixN::from_fn_unchecked(n, |i, j| {
            c6 * a6.get(i, j) + c4 * a4.get(i, j) + c2 * a2.get(i, j) + c0 * id.get(i, j)
        })
    };
    let u_inner = &a6.matmul(&lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u_inner);
    let v = &a6.matmul(&lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    let num = &v + &u;
    let den = &v - &u;
    let lu = lu_factor(n, den.as_slice().to_vec(), 0.0)
        .map_err(|_| Error::Overflow("singular Padé denominator".into()))?;
    let mut out = MatrixN::zeros(n);
    for j in 0..n {
        let col = lu.solve(&num.column(j));
        for (i, x) in col.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(d: &[f64]) -> MatrixN {
        MatrixN::from_diag(d).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(MatrixN::new(1, vec![1.0]), Err(Error::DimensionTooSmall(1))));
        assert!(matches!(
            MatrixN::new(2, vec![1.0, 2.0, 3.0]),
            Err(Error::Shape { expected: 4, actual: 3 })
        ));
        assert!(matches!(
            MatrixN::new(2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn svd_of_sorted_diagonal_is_trivial() {
        let r = svd(&diag(&[2.35, 1.9])).unwrap();
        assert_eq!(r.sigma, vec![2.35, 1.9]);
        assert_eq!(r.u, MatrixN::identity(2));
        assert_eq!(r.v, MatrixN::identity(2));
        assert_eq!(r.sign, 1);
    }

    #[test]
    fn svd_absorbs_negative_entry_into_sign() {
        let r = svd(&diag(&[1.9, -0.1])).unwrap();
        assert_abs_diff_eq!(r.sigma[0], 1.9, epsilon = 1e-15);
        assert_abs_diff_eq!(r.sigma[1], 0.1, epsilon = 1e-15);
        assert_eq!(r.sign, -1);
    }

    #[test]
    fn svd_of_zero_matrix_completes_factors() {
        let r = svd(&MatrixN::zeros(3)).unwrap();
        assert_eq!(r.sigma, vec![0.0; 3]);
        let utu = r.u.transpose().matmul(&r.u);
        assert!((&utu - &MatrixN::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        let a = MatrixN::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap();
        let r = svd(&a).unwrap();
        let back = MatrixN::compose(&r.u, &r.sigma, &r.v);
        assert!((&back - &a).frobenius_norm() < 1e-13);
        let utu = r.u.transpose().matmul(&r.u);
        assert!((&utu - &MatrixN::identity(3)).frobenius_norm() < 1e-12 * 3.0);
        assert!(r.sigma[2] < 1e-14);
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        let e = expm(&MatrixN::zeros(3)).unwrap();
        assert_eq!(e, MatrixN::identity(3));
        let e = expm(&diag(&[2f64.ln(), 3f64.ln()])).unwrap();
        assert_abs_diff_eq!(e.get(0, 0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(1, 1), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(0, 1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_rotation_generator() {
        // exp of a skew generator is a rotation by the angle
        let th = 2.5;
        let t = MatrixN::from_rows(&[vec![0.0, -th], vec![th, 0.0]]).unwrap();
        let e = expm(&t).unwrap();
        assert_abs_diff_eq!(e.get(0, 0), th.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e.get(1, 0), th.sin(), epsilon = 1e-13);
    }

    #[test]
    fn expm_rejects_overflowing_trace() {
        let t = diag(&[400.0, 400.0]);
        assert!(matches!(expm(&t), Err(Error::Overflow(_))));
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&MatrixN::identity(3)), 1.0);
        assert_abs_diff_eq!(det(&diag(&[2.0, 1.0])), 2.0);
        let k = 2.0;
        assert_abs_diff_eq!(det(&diag(&[k, 2.0 / k])), 2.0);
        let singular = MatrixN::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(det(&singular), 0.0);
    }

    #[test]
    fn det_of_rotation_is_one() {
        let c = 0.3f64.cos();
        let s = 0.3f64.sin();
        let q = MatrixN::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        assert_abs_diff_eq!(det(&q), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_solve_examples() {
        let x = dense_solve(&[1.0, 0.0, 0.0, 1.0], &[3.0, -4.0]).unwrap();
        assert_eq!(x, vec![3.0, -4.0]);
        let x = dense_solve(&[1.0, -0.7, -0.7, 1.0], &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0 / 0.51, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 0.7 / 0.51, epsilon = 1e-14);
        assert!(matches!(
            dense_solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0]),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let a = MatrixN::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let ai = inverse(&a).unwrap();
        assert!((&a.matmul(&ai) - &MatrixN::identity(2)).max_abs() < 1e-15);
    }
}
