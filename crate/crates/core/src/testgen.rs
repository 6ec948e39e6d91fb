//! Reproducible random test matrices and independent reference solutions.
//!
//! Matrices are built in logarithmic space: `A = expm(T)` where `T` has
//! independent uniform entries in `sqrt(n) * [-ln(eps)/n, ln(eps)/n]`, so
//! `ln det A = tr T` follows a scaled Bates distribution.
//!
//! # Random numbers
//!
//! All draws come from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with
//! `seed_from_u64(seed)` and switched to stream `family_id << 32 | n`, where
//! `family_id` is 0 (`ge1`), 1 (`lt1`), 2 (`singular`) or 3 (`cone_boundary`).
//! A uniform double in `[0, 1)` is `(next_u64() >> 11) * 2^-53`. Changing any
//! of this changes every generated test set.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coords::HyperbolicBasis;
use crate::error::{Error, Result};
use crate::linalg::{det, expm, svd, MatrixN};
use crate::spectrum::Spectrum;

pub const DEFAULT_EPSILON: f64 = 100.0;
/// Rejection-sampling attempts before giving up on a determinant filter.
const MAX_REJECTIONS: usize = 10_000;
const QUARTIC_TOL: f64 = 1e-13;
const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `det A >= 1`
    Ge1,
    /// `det A < 1`
    Lt1,
    /// The smallest `ceil(n/3)` singular values set to zero.
    Singular,
    /// Runs of singular values merged to their geometric mean.
    ConeBoundary,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Ge1, Family::Lt1, Family::Singular, Family::ConeBoundary];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ge1 => "ge1",
            Family::Lt1 => "lt1",
            Family::Singular => "singular",
            Family::ConeBoundary => "cone_boundary",
        }
    }

    pub fn id(self) -> u64 {
        match self {
            Family::Ge1 => 0,
            Family::Lt1 => 1,
            Family::Singular => 2,
            Family::ConeBoundary => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSetSpec {
    pub n: usize,
    pub count: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub family: Family,
}

impl TestSetSpec {
    pub fn new(n: usize, count: usize, seed: u64, family: Family) -> Self {
        Self {
            n,
            count,
            epsilon: DEFAULT_EPSILON,
            seed,
            family,
        }
    }
}

/// The generator described in the module documentation.
#[derive(Debug, Clone)]
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64, family: Family, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(family.id() << 32 | n as u64);
        Self(rng)
    }

    /// Generator on stream 0, for callers outside the test-set protocol.
    pub fn from_seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        ((self.next_f64() * bound as f64) as usize).min(bound - 1)
    }
}

/// `expm(T)` with `T_ij` uniform in `sqrt(n) * [-ln(eps)/n, ln(eps)/n]`.
pub fn gen_matrix(n: usize, epsilon: f64, rng: &mut TestRng) -> Result<MatrixN> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(epsilon > 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must exceed 1, got {epsilon}")));
    }
    let bound = (n as f64).sqrt() * epsilon.ln() / n as f64;
    let t = MatrixN::from_fn(n, |_, _| rng.uniform(-bound, bound))?;
    expm(&t)
}

/// Zeroes the smallest `ceil(n/3)` singular values.
pub fn derive_singular(a: &MatrixN) -> Result<MatrixN> {
    let n = a.n();
    let f = svd(a)?;
    let mut sigma = f.sigma;
    for s in sigma.iter_mut().skip(n - n.div_ceil(3)) {
        *s = 0.0;
    }
    Ok(MatrixN::compose(&f.u, &sigma, &f.v))
}

/// Geometric-mean merging of singular values.
///
/// `indices` are 1-based positions in `1..n`; index `i` ties `sigma_i` to
/// `sigma_{i+1}`. Each maximal run `i..=j` of indices replaces
/// `sigma_i, ..., sigma_{j+1}` by their geometric mean.
pub fn merge_singular_values(sigma: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
    let n = sigma.len();
    let mut tied = vec![false; n];
    for &i in indices {
        if i == 0 || i >= n {
            return Err(Error::InvalidArgument(format!("merge index {i} outside 1..{n}")));
        }
        tied[i - 1] = true;
    }
    let mut out = sigma.to_vec();
    let mut k = 0;
    while k < n {
        if !tied[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && tied[k] {
            k += 1;
        }
        // 0-based positions start..=k
        let run = &sigma[start..=k];
        let gm = if run.contains(&0.0) {
            0.0
        } else {
            (run.iter().map(|s| s.ln()).sum::<f64>() / run.len() as f64).exp()
        };
        out[start..=k].iter_mut().for_each(|s| *s = gm);
        k += 1;
    }
    Ok(out)
}

pub fn derive_cone_boundary(a: &MatrixN, indices: &[usize]) -> Result<MatrixN> {
    let f = svd(a)?;
    let sigma = merge_singular_values(&f.sigma, indices)?;
    Ok(MatrixN::compose(&f.u, &sigma, &f.v))
}

/// `floor(n/3)` distinct indices from `1..n`, sorted.
pub fn draw_merge_indices(n: usize, rng: &mut TestRng) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..n).collect();
    let k = n / 3;
    for i in 0..k {
        let j = i + rng.below(pool.len() - i);
        pool.swap(i, j);
    }
    let mut out = pool[..k].to_vec();
    out.sort_unstable();
    out
}

pub fn derive_family(a: &MatrixN, family: Family, rng: &mut TestRng) -> Result<MatrixN> {
    match family {
        Family::Singular => derive_singular(a),
        Family::ConeBoundary => {
            let idx = draw_merge_indices(a.n(), rng);
            if idx.is_empty() {
                return Ok(a.clone());
            }
            derive_cone_boundary(a, &idx)
        }
        Family::Ge1 | Family::Lt1 => Err(Error::InvalidArgument(format!(
            "family {family} is not derived from another matrix"
        ))),
    }
}

fn next_matrix(spec: &TestSetSpec, rng: &mut TestRng) -> Result<MatrixN> {
    match spec.family {
        Family::Ge1 | Family::Lt1 => {
            for _ in 0..MAX_REJECTIONS {
                let a = gen_matrix(spec.n, spec.epsilon, rng)?;
                let d = det(&a);
                if (spec.family == Family::Ge1) == (d >= 1.0) {
                    return Ok(a);
                }
            }
            Err(Error::InvalidArgument(format!(
                "no {} matrix after {MAX_REJECTIONS} draws",
                spec.family
            )))
        }
        Family::Singular | Family::ConeBoundary => {
            let a = gen_matrix(spec.n, spec.epsilon, rng)?;
            derive_family(&a, spec.family, rng)
        }
    }
}

/// The whole test set described by `spec`, in generation order.
pub fn generate_set(spec: &TestSetSpec) -> Result<Vec<MatrixN>> {
    let mut rng = TestRng::new(spec.seed, spec.family, spec.n);
    (0..spec.count).map(|_| next_matrix(spec, &mut rng)).collect()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// A stationary point of the two-dimensional problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticRoot {
    pub p: [f64; 2],
    pub lambda: f64,
    pub distance: f64,
}

impl QuarticRoot {
    pub fn is_positive(&self) -> bool {
        self.p[0] > 0.0
    }

    /// Positive and ordered `p_1 >= p_2`.
    pub fn in_cone(&self) -> bool {
        self.is_positive() && self.p[0] >= self.p[1]
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &ci| acc * x + ci)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    c[..deg]
        .iter()
        .enumerate()
        .map(|(k, &ck)| ck * (deg - k) as f64)
        .collect()
}

/// Real roots of the polynomial with coefficients `c` (highest degree
/// first) in `[-bound, bound]`, found between consecutive critical points.
fn real_roots(c: &[f64], bound: f64) -> Vec<f64> {
    if c.len() == 2 {
        let r = -c[1] / c[0];
        return if r.abs() <= bound { vec![r] } else { vec![] };
    }
    let mut knots = vec![-bound];
    knots.extend(real_roots(&derivative(c), bound));
    knots.push(bound);
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (f_lo, f_hi) = (horner(c, lo), horner(c, hi));
        if f_lo.abs() <= 1e-14 * scale {
            roots.push(lo);
            continue;
        }
        if f_lo * f_hi > 0.0 || f_hi == 0.0 {
            continue;
        }
        while hi - lo > QUARTIC_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = horner(c, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if let Some(&last) = knots.last() {
        if horner(c, last).abs() <= 1e-14 * scale {
            roots.push(last);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    roots
}

/// All stationary points for `n = 2` from the real roots of
/// `x^4 - a_1 x^3 + a_2 x - 1 = 0`, with `p = (x, 1/x)`, `lambda = (a_1 - x) x`.
pub fn oracle_quartic_2d(a: [f64; 2]) -> Vec<QuarticRoot> {
    let coeffs = [1.0, -a[0], 0.0, a[1], -1.0];
    let bound = 1.0 + a[0].abs().max(a[1].abs()).max(1.0);
    real_roots(&coeffs, bound)
        .into_iter()
        .map(|x| {
            let p = [x, 1.0 / x];
            QuarticRoot {
                p,
                lambda: (a[0] - x) * x,
                distance: 0.5 * ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub p: Vec<f64>,
    /// Chart coordinates: `t` for `n = 2`, `zeta_bar` for `n = 3`.
    pub coords: Vec<f64>,
    pub distance: f64,
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Exhaustive search for the global minimizer over the exponential chart.
///
/// `n = 2`: `p = (e^t, e^-t)` on a grid of `cells` intervals over
/// `[-span, span]`, refined by golden section. `n = 3`: `p = exp(B_bar zeta)`
/// on a `cells x cells` grid, refined by coordinate descent.
pub fn oracle_grid(a: &Spectrum, span: f64, cells: usize) -> Result<GridMinimum> {
    let n = a.len();
    if !(span > 0.0) || cells < 4 {
        return Err(Error::InvalidArgument("span must be positive and cells at least 4".into()));
    }
    let h = 2.0 * span / cells as f64;
    let node = |k: usize| -span + k as f64 * h;
    match n {
        2 => {
            let f = |t: f64| 0.5 * ((t.exp() - a[0]).powi(2) + ((-t).exp() - a[1]).powi(2));
            let best = (0..=cells)
                .min_by(|&x, &y| f(node(x)).total_cmp(&f(node(y))))
                .unwrap_or(0);
            if best == 0 || best == cells {
                return Err(Error::SpanTooSmall);
            }
            let t = golden_section(f, node(best - 1), node(best + 1));
            Ok(GridMinimum {
                p: vec![t.exp(), (-t).exp()],
                coords: vec![t],
                distance: f(t),
            })
        }
        3 => {
            let basis = HyperbolicBasis::new(3);
            let f = |z: &[f64]| {
                let xi = basis.bar_apply(z);
                0.5 * xi.iter().zip(a.iter()).map(|(x, ai)| (x.exp() - ai).powi(2)).sum::<f64>()
            };
            let mut best = (0, 0);
            let mut best_val = f64::INFINITY;
            for i in 0..=cells {
                for j in 0..=cells {
                    let v = f(&[node(i), node(j)]);
                    if v < best_val {
                        best_val = v;
                        best = (i, j);
                    }
                }
            }
            if best.0 == 0 || best.0 == cells || best.1 == 0 || best.1 == cells {
                return Err(Error::SpanTooSmall);
            }
            let mut z = vec![node(best.0), node(best.1)];
            let mut radius = h;
            for _ in 0..500 {
                let before = f(&z);
                for k in 0..2 {
                    let centre = z[k];
                    let along = |s: f64| {
                        let mut w = z.clone();
                        w[k] = s;
                        f(&w)
                    };
                    z[k] = golden_section(along, centre - radius, centre + radius);
                }
                let after = f(&z);
                let moved = before - after;
                radius = (radius * 0.7).max(1e-9);
                if moved.abs() < 1e-16 && radius <= 1e-8 {
                    break;
                }
            }
            let xi = basis.bar_apply(&z);
            Ok(GridMinimum {
                p: xi.iter().map(|x| x.exp()).collect(),
                distance: f(&z),
                coords: z,
            })
        }
        _ => Err(Error::InvalidArgument(format!("grid oracle supports n = 2 or 3, got {n}"))),
    }
}

/// Central differences: entry `(i, j)` is `d f_i / d x_j`.
pub fn finite_difference_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, |c| c.len());
    (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn generator_is_deterministic_and_bounded() {
        let spec = TestSetSpec::new(3, 5, 7, Family::Ge1);
        assert_eq!(generate_set(&spec).unwrap(), generate_set(&spec).unwrap());
        let mut rng = TestRng::new(1, Family::Lt1, 2);
        let bound = 2f64.sqrt() * 10f64.ln();
        for _ in 0..200 {
            let t = rng.uniform(-bound, bound);
            assert!(t.abs() <= bound);
        }
        for n in [2, 4, 8] {
            let mut rng = TestRng::new(3, Family::Ge1, n);
            for _ in 0..20 {
                let d = det(&gen_matrix(n, 100.0, &mut rng).unwrap());
                let lim = 100f64.powf((n as f64).sqrt());
                assert!(d >= (1.0 / lim) * (1.0 - 1e-6) && d <= lim * (1.0 + 1e-6));
            }
        }
    }

    #[test]
    fn family_filters() {
        for m in generate_set(&TestSetSpec::new(3, 20, 11, Family::Ge1)).unwrap() {
            assert!(det(&m) >= 1.0);
        }
        for m in generate_set(&TestSetSpec::new(3, 20, 11, Family::Lt1)).unwrap() {
            assert!(det(&m) < 1.0);
        }
    }

    #[test]
    fn singular_family_example() {
        let a = MatrixN::from_diag(&[3.0, 2.0, 1.0, 0.5]).unwrap();
        let s = svd(&derive_singular(&a).unwrap()).unwrap();
        assert_abs_diff_eq!(s.sigma[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.sigma[1], 2.0, epsilon = 1e-12);
        assert!(s.sigma[2] < 1e-12 && s.sigma[3] < 1e-12);
    }

    #[test]
    fn merge_example() {
        let sigma = [8.0, 4.0, 2.0, 1.0, 0.5, 0.25];
        let got = merge_singular_values(&sigma, &[2, 3]).unwrap();
        for (x, y) in got.iter().zip([8.0, 2.0, 2.0, 2.0, 0.5, 0.25]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-14);
        }
        let a = MatrixN::from_diag(&[3.0, 1.0]).unwrap();
        let mut rng = TestRng::from_seed(0);
        assert_eq!(derive_family(&a, Family::ConeBoundary, &mut rng).unwrap(), a);
    }

    #[test]
    fn cone_boundary_preserves_determinant() {
        for m in generate_set(&TestSetSpec::new(6, 10, 5, Family::ConeBoundary)).unwrap() {
            let s = svd(&m).unwrap().sigma;
            assert!(s.windows(2).any(|w| (w[0] - w[1]).abs() <= 1e-10 * w[0]));
            assert!(det(&m) > 0.0);
        }
    }

    #[test]
    fn quartic_examples() {
        let xs: Vec<f64> = oracle_quartic_2d([2.5, 2.5]).iter().map(|r| r.p[0]).collect();
        assert_eq!(xs.len(), 4);
        for (x, y) in xs.iter().zip([-1.0, 0.5, 1.0, 2.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
        let xs: Vec<f64> = oracle_quartic_2d([0.0, 0.0]).iter().map(|r| r.p[0]).collect();
        assert_eq!(xs.len(), 2);
        assert_abs_diff_eq!(xs[1], 1.0, epsilon = 1e-12);
        let cone: Vec<_> = oracle_quartic_2d([2.5, 2.0]).into_iter().filter(|r| r.in_cone()).collect();
        assert_eq!(cone.len(), 1);
        let x = cone[0].p[0];
        assert_abs_diff_eq!(x, 2.174212, epsilon = 1e-6);
        assert!((x.powi(4) - 2.5 * x.powi(3) + 2.0 * x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn grid_examples() {
        let g = oracle_grid(&Spectrum::new(vec![1.0, 1.0]).unwrap(), 3.0, 600).unwrap();
        assert_abs_diff_eq!(g.coords[0], 0.0, epsilon = 1e-6);
        assert!(g.distance < 1e-12);
        let g = oracle_grid(&Spectrum::new(vec![2.35, 1.9]).unwrap(), 3.0, 600).unwrap();
        assert_abs_diff_eq!(g.coords[0], 2f64.ln(), epsilon = 1e-6);
        assert_abs_diff_eq!(g.distance, 1.04125, epsilon = 1e-8);
        let g = oracle_grid(&Spectrum::new(vec![2.5, 2.5]).unwrap(), 3.0, 600).unwrap();
        assert_abs_diff_eq!(g.distance, 2.125, epsilon = 1e-8);
        assert!(g.distance < 2.25);
        assert!(matches!(
            oracle_grid(&Spectrum::new(vec![50.0, 0.0]).unwrap(), 1.0, 100),
            Err(Error::SpanTooSmall)
        ));
        let g = oracle_grid(&Spectrum::new(vec![1.875, 0.75, 0.0]).unwrap(), 3.0, 300).unwrap();
        for (x, y) in g.p.iter().zip([2.0, 1.0, 0.5]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-5);
        }
    }

    #[test]
    fn finite_differences() {
        let g = finite_difference_jacobian(|x| vec![crate::spectrum::prod(x)], &[1.0; 4], 1e-6);
        for v in &g[0] {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-9);
        }
        let id = MatrixN::identity(3).into_vec();
        let g = finite_difference_jacobian(|x| vec![det(&MatrixN::new(3, x.to_vec()).unwrap())], &id, 1e-6);
        for (k, v) in g[0].iter().enumerate() {
            assert_abs_diff_eq!(*v, id[k], epsilon = 1e-8);
        }
    }
}
