//! C interface to `slproj`.
//!
//! Matrices and projection results cross the boundary as opaque handles
//! created by this library and released with the matching `*_free`
//! function. Every fallible function returns an [`SlprojStatus`]; on failure
//! a message is available from [`slproj_last_error`] on the same thread.
//! Panics are caught and reported as `SLPROJ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slproj::derivative::projection_derivative;
use slproj::linalg::MatrixN;
use slproj::projector::{project, project_spectrum, ProjectionResult};
use slproj::solver::{Algorithm, SolveOptions, SolverStatus};
use slproj::spectrum::Spectrum;
use slproj::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlprojStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NonFinite = 4,
    SingularInput = 5,
    IllPosed = 6,
    Degenerate = 7,
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlprojAlgorithm {
    /// Newton in log coordinates, bisection if it fails or stops at a saddle.
    Auto = 0,
    Bisection = 1,
    Composite = 2,
    NewtonHyp = 3,
    NewtonLog = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlprojSolverStatus {
    Converged = 0,
    MaxIterations = 1,
    SingularHessian = 2,
    NoBracket = 3,
    Diverged = 4,
}

/// Opaque square matrix.
pub struct SlprojMatrix(MatrixN);

/// Opaque projection result.
pub struct SlprojProjection(ProjectionResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SlprojStatus {
    match err {
        Error::Shape { .. } | Error::DimensionTooSmall(_) => SlprojStatus::Shape,
        Error::NonFinite(_) => SlprojStatus::NonFinite,
        Error::SingularInput | Error::SingularMatrix { .. } => SlprojStatus::SingularInput,
        Error::IllPosed(_) => SlprojStatus::IllPosed,
        Error::DegenerateProjection(_) => SlprojStatus::Degenerate,
        Error::InvalidSpectrum(_) | Error::InvalidArgument(_) | Error::NonPositiveInput(_) => {
            SlprojStatus::InvalidArgument
        }
        _ => SlprojStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SlprojStatus>) -> SlprojStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlprojStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside slproj");
            SlprojStatus::Panic
        }
    }
}

fn fail(err: Error) -> SlprojStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null(what: &str) -> SlprojStatus {
    set_error(&format!("{what} is null"));
    SlprojStatus::NullPointer
}

/// Decodes an `SlprojAlgorithm` value received as a plain integer.
fn algorithm(code: u32) -> Result<Option<Algorithm>, SlprojStatus> {
    const AUTO: u32 = SlprojAlgorithm::Auto as u32;
    const BISECTION: u32 = SlprojAlgorithm::Bisection as u32;
    const COMPOSITE: u32 = SlprojAlgorithm::Composite as u32;
    const NEWTON_HYP: u32 = SlprojAlgorithm::NewtonHyp as u32;
    const NEWTON_LOG: u32 = SlprojAlgorithm::NewtonLog as u32;
    match code {
        AUTO => Ok(None),
        BISECTION => Ok(Some(Algorithm::Bisection)),
        COMPOSITE => Ok(Some(Algorithm::Composite)),
        NEWTON_HYP => Ok(Some(Algorithm::NewtonHyp)),
        NEWTON_LOG => Ok(Some(Algorithm::NewtonLog)),
        _ => Err(fail(Error::InvalidArgument(format!("unknown algorithm code {code}")))),
    }
}

fn solver_status(s: SolverStatus) -> SlprojSolverStatus {
    match s {
        SolverStatus::Converged => SlprojSolverStatus::Converged,
        SolverStatus::MaxIterations => SlprojSolverStatus::MaxIterations,
        SolverStatus::SingularHessian => SlprojSolverStatus::SingularHessian,
        SolverStatus::NoBracket => SlprojSolverStatus::NoBracket,
        SolverStatus::Diverged => SlprojSolverStatus::Diverged,
    }
}

fn options(tol: f64, max_iter: usize) -> Result<SolveOptions, SlprojStatus> {
    let mut opts = SolveOptions::default();
    if tol > 0.0 {
        opts.tol = tol;
    } else if tol != 0.0 || tol.is_nan() {
        set_error("tol must be positive, or 0 for the default");
        return Err(SlprojStatus::InvalidArgument);
    }
    if max_iter > 0 {
        opts.max_iter = max_iter;
    }
    Ok(opts)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn slproj_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread. Valid until the next call
/// that fails on the same thread.
#[no_mangle]
pub extern "C" fn slproj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an `n x n` matrix from `n * n` row-major values.
///
/// # Safety
/// `data` must point to `n * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slproj_matrix_new(n: usize, data: *const f64, out: *mut *mut SlprojMatrix) -> SlprojStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(n).ok_or_else(|| fail(Error::DimensionTooSmall(n)))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let m = MatrixN::new(n, values).map_err(fail)?;
        *out = Box::into_raw(Box::new(SlprojMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn slproj_matrix_free(m: *mut SlprojMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_matrix_dim(m: *const SlprojMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// Copies the row-major entries into `out`, which holds `len >= n * n` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn slproj_matrix_copy(m: *const SlprojMatrix, out: *mut f64, len: usize) -> SlprojStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let src = m.0.as_slice();
        if len < src.len() {
            return Err(fail(Error::Shape {
                expected: src.len(),
                actual: len,
            }));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        Ok(())
    })
}

/// Projects `a` onto `SL(n)` with the solver `alg` (an `SlprojAlgorithm`
/// value). `tol = 0` and `max_iter = 0` select the defaults.
///
/// A solver that stops without converging still yields a result; inspect
/// [`slproj_projection_status`].
///
/// # Safety
/// `a` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn slproj_project(
    a: *const SlprojMatrix,
    alg: u32,
    tol: f64,
    max_iter: usize,
    out: *mut *mut SlprojProjection,
) -> SlprojStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = options(tol, max_iter)?;
        let r = project(&a.0, algorithm(alg)?, &opts).map_err(fail)?;
        *out = Box::into_raw(Box::new(SlprojProjection(r)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_free(p: *mut SlprojProjection) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// New matrix handle holding the projection `P`.
///
/// # Safety
/// `p` must be a live projection handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_matrix(
    p: *const SlprojProjection,
    out: *mut *mut SlprojMatrix,
) -> SlprojStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("projection"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(SlprojMatrix(p.0.p_matrix.clone())));
        Ok(())
    })
}

/// Copies the projected singular values (`n` doubles) into `out`.
///
/// # Safety
/// `p` must be a live projection handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_diag(p: *const SlprojProjection, out: *mut f64, len: usize) -> SlprojStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("projection"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = &p.0.p_diag;
        if len < d.len() {
            return Err(fail(Error::Shape {
                expected: d.len(),
                actual: len,
            }));
        }
        ptr::copy_nonoverlapping(d.as_ptr(), out, d.len());
        Ok(())
    })
}

/// Lagrange multiplier, or NaN for a null handle.
///
/// # Safety
/// `p` must be null or a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_lambda(p: *const SlprojProjection) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.lambda)
}

/// `1/2 |A - P|_F^2`, or NaN for a null handle.
///
/// # Safety
/// `p` must be null or a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_distance(p: *const SlprojProjection) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.distance)
}

/// # Safety
/// `p` must be null or a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_iterations(p: *const SlprojProjection) -> usize {
    p.as_ref().map_or(0, |p| p.0.report.iterations)
}

/// # Safety
/// `p` must be a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_status(p: *const SlprojProjection) -> SlprojSolverStatus {
    p.as_ref()
        .map_or(SlprojSolverStatus::Diverged, |p| solver_status(p.0.report.status))
}

/// Algorithm that produced the result (never `SLPROJ_ALGORITHM_AUTO`).
///
/// # Safety
/// `p` must be a live projection handle.
#[no_mangle]
pub unsafe extern "C" fn slproj_projection_algorithm(p: *const SlprojProjection) -> SlprojAlgorithm {
    match p.as_ref().map(|p| p.0.algorithm) {
        Some(Algorithm::Bisection) => SlprojAlgorithm::Bisection,
        Some(Algorithm::Composite) => SlprojAlgorithm::Composite,
        Some(Algorithm::NewtonHyp) => SlprojAlgorithm::NewtonHyp,
        Some(Algorithm::NewtonLog) => SlprojAlgorithm::NewtonLog,
        None => SlprojAlgorithm::Auto,
    }
}

/// Derivative of the projection of `a` (already projected into `proj`) in
/// direction `direction`. Writes a new matrix handle for `dP` and `d_lambda`.
///
/// # Safety
/// All handles must be live; `out_dp` and `out_dlambda` writable.
#[no_mangle]
pub unsafe extern "C" fn slproj_derivative(
    a: *const SlprojMatrix,
    proj: *const SlprojProjection,
    direction: *const SlprojMatrix,
    out_dp: *mut *mut SlprojMatrix,
    out_dlambda: *mut f64,
) -> SlprojStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| null("matrix"))?;
        let proj = proj.as_ref().ok_or_else(|| null("projection"))?;
        let da = direction.as_ref().ok_or_else(|| null("direction"))?;
        if out_dp.is_null() || out_dlambda.is_null() {
            return Err(null("output"));
        }
        let d = projection_derivative(&a.0, &da.0, &proj.0).map_err(fail)?;
        *out_dp = Box::into_raw(Box::new(SlprojMatrix(d.delta_p)));
        *out_dlambda = d.delta_lambda;
        Ok(())
    })
}

/// Solves the diagonal problem for a non-increasing, non-negative `a` of
/// length `n` with the solver `alg` (an `SlprojAlgorithm` value).
///
/// # Safety
/// `a` must hold `n` readable doubles, `p_out` `n` writable doubles;
/// `lambda_out` and `status_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slproj_project_spectrum(
    a: *const f64,
    n: usize,
    alg: u32,
    p_out: *mut f64,
    lambda_out: *mut f64,
    status_out: *mut SlprojSolverStatus,
) -> SlprojStatus {
    guard(|| {
        if a.is_null() || p_out.is_null() || lambda_out.is_null() || status_out.is_null() {
            return Err(null("argument"));
        }
        let values = std::slice::from_raw_parts(a, n).to_vec();
        let spec = Spectrum::new(values).map_err(fail)?;
        let r = project_spectrum(&spec, algorithm(alg)?, &SolveOptions::default()).map_err(fail)?;
        ptr::copy_nonoverlapping(r.solution.point.p.as_ptr(), p_out, n);
        *lambda_out = r.solution.point.lambda;
        *status_out = solver_status(r.solution.report.status);
        Ok(())
    })
}

/// Length of the message returned by [`slproj_last_error`], excluding the NUL.
#[no_mangle]
pub extern "C" fn slproj_last_error_length() -> usize {
    LAST_ERROR.with(|e| CStr::to_bytes(e.borrow().as_c_str()).len())
}
