use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use slproj_ffi::*;

fn matrix(n: usize, data: &[f64]) -> *mut SlprojMatrix {
    let mut m = ptr::null_mut();
    let st = unsafe { slproj_matrix_new(n, data.as_ptr(), &mut m) };
    assert_eq!(st, SlprojStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(slproj_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn project_diagonal_matrix() {
    let a = matrix(2, &[2.35, 0.0, 0.0, 1.9]);
    let mut proj = ptr::null_mut();
    let st = unsafe { slproj_project(a, SlprojAlgorithm::Auto as u32, 0.0, 0, &mut proj) };
    assert_eq!(st, SlprojStatus::Ok);
    unsafe {
        assert_eq!(slproj_projection_status(proj), SlprojSolverStatus::Converged);
        assert!((slproj_projection_lambda(proj) - 0.7).abs() < 1e-9);
        assert!((slproj_projection_distance(proj) - 1.04125).abs() < 1e-9);
        assert!(slproj_projection_iterations(proj) > 0);
        assert_eq!(slproj_projection_algorithm(proj), SlprojAlgorithm::NewtonLog);

        let mut diag = [0.0; 2];
        assert_eq!(slproj_projection_diag(proj, diag.as_mut_ptr(), 2), SlprojStatus::Ok);
        assert!((diag[0] - 2.0).abs() < 1e-9 && (diag[1] - 0.5).abs() < 1e-9);

        let mut p = ptr::null_mut();
        assert_eq!(slproj_projection_matrix(proj, &mut p), SlprojStatus::Ok);
        assert_eq!(slproj_matrix_dim(p), 2);
        let mut data = [0.0; 4];
        assert_eq!(slproj_matrix_copy(p, data.as_mut_ptr(), 4), SlprojStatus::Ok);
        assert!((data[0] - 2.0).abs() < 1e-9 && data[1].abs() < 1e-12);
        assert_eq!(slproj_matrix_copy(p, data.as_mut_ptr(), 3), SlprojStatus::Shape);

        slproj_matrix_free(p);
        slproj_projection_free(proj);
        slproj_matrix_free(a);
    }
}

#[test]
fn derivative_and_ill_posed() {
    let a = matrix(2, &[1.0, 0.0, 0.0, 1.0]);
    let da = matrix(2, &[0.3, -1.0, 2.0, 0.5]);
    unsafe {
        let mut proj = ptr::null_mut();
        assert_eq!(slproj_project(a, SlprojAlgorithm::Auto as u32, 0.0, 0, &mut proj), SlprojStatus::Ok);
        let mut dp = ptr::null_mut();
        let mut dl = f64::NAN;
        assert_eq!(slproj_derivative(a, proj, da, &mut dp, &mut dl), SlprojStatus::Ok);
        let mut out = [0.0; 4];
        slproj_matrix_copy(dp, out.as_mut_ptr(), 4);
        // dA - tr(dA)/2 I
        let expected = [0.3 - 0.4, -1.0, 2.0, 0.5 - 0.4];
        for (x, y) in out.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
        slproj_matrix_free(dp);
        slproj_projection_free(proj);

        let b = matrix(2, &[2.0, 0.0, 0.0, 2.0]);
        let mut proj = ptr::null_mut();
        assert_eq!(slproj_project(b, SlprojAlgorithm::Auto as u32, 0.0, 0, &mut proj), SlprojStatus::Ok);
        let mut dp = ptr::null_mut();
        assert_eq!(slproj_derivative(b, proj, da, &mut dp, &mut dl), SlprojStatus::IllPosed);
        assert!(dp.is_null());
        assert!(last_error().contains("ill-posed"));
        slproj_projection_free(proj);
        slproj_matrix_free(b);
    }
    unsafe {
        slproj_matrix_free(a);
        slproj_matrix_free(da);
    }
}

#[test]
fn spectrum_entry_point() {
    let a = [1.9, 0.1];
    let mut p = [0.0; 2];
    let mut lambda = 0.0;
    let mut status = SlprojSolverStatus::Diverged;
    for alg in [
        SlprojAlgorithm::Bisection,
        SlprojAlgorithm::Composite,
        SlprojAlgorithm::NewtonHyp,
        SlprojAlgorithm::NewtonLog,
    ] {
        let st = unsafe {
            slproj_project_spectrum(a.as_ptr(), 2, alg as u32, p.as_mut_ptr(), &mut lambda, &mut status)
        };
        assert_eq!(st, SlprojStatus::Ok);
        assert_eq!(status, SlprojSolverStatus::Converged);
        assert!((p[0] - 2.0).abs() < 1e-6 && (lambda + 0.2).abs() < 1e-6);
    }
    let unsorted = [0.1, 1.9];
    let st = unsafe {
        slproj_project_spectrum(unsorted.as_ptr(), 2, 0, p.as_mut_ptr(), &mut lambda, &mut status)
    };
    assert_eq!(st, SlprojStatus::InvalidArgument);
}

#[test]
fn argument_errors() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(slproj_matrix_new(2, ptr::null(), &mut m), SlprojStatus::NullPointer);
        assert!(last_error().contains("null"));
        let bad = [1.0, f64::NAN, 0.0, 1.0];
        assert_eq!(slproj_matrix_new(2, bad.as_ptr(), &mut m), SlprojStatus::NonFinite);
        assert!(slproj_last_error_length() > 0);
        let one = [1.0];
        assert_eq!(slproj_matrix_new(1, one.as_ptr(), &mut m), SlprojStatus::Shape);
        assert!(m.is_null());

        let a = matrix(2, &[1.0, 0.0, 0.0, 1.0]);
        let mut proj = ptr::null_mut();
        assert_eq!(slproj_project(a, 99, 0.0, 0, &mut proj), SlprojStatus::InvalidArgument);
        assert_eq!(slproj_project(a, 0, -1.0, 0, &mut proj), SlprojStatus::InvalidArgument);
        assert_eq!(slproj_project(ptr::null(), 0, 0.0, 0, &mut proj), SlprojStatus::NullPointer);
        assert!(slproj_projection_lambda(ptr::null()).is_nan());
        assert_eq!(slproj_matrix_dim(ptr::null()), 0);
        slproj_matrix_free(ptr::null_mut());
        slproj_projection_free(ptr::null_mut());
        slproj_matrix_free(a);

        let v = CStr::from_ptr(slproj_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/slproj.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for name in [
        "slproj_matrix_new",
        "slproj_matrix_free",
        "slproj_project",
        "slproj_projection_matrix",
        "slproj_derivative",
        "slproj_project_spectrum",
        "slproj_last_error",
        "typedef struct SlprojMatrix SlprojMatrix",
        "SLPROJ_STATUS_ILL_POSED",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler found; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
