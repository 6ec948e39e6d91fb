use proptest::prelude::*;

use slproj::cli::{format_matrix, parse_matrix};
use slproj::derivative::{
    apply_s, check_well_posed, matrix_level_derivative, projection_derivative, sensitivity_residual,
    solve_sensitivity, SensitivityMode,
};
use slproj::linalg::{expm, MatrixN};
use slproj::projector::{project, project_spectrum};
use slproj::solver::{Algorithm, SolveOptions};
use slproj::spectrum::{distance, Spectrum};
use slproj::testgen::oracle_quartic_2d;

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn matrix(n: usize, entries: &[f64]) -> MatrixN {
    MatrixN::new(n, entries[..n * n].to_vec()).unwrap()
}

fn orthogonal(n: usize, entries: &[f64]) -> MatrixN {
    let s = MatrixN::from_fn(n, |i, j| entries[i * n + j] - entries[j * n + i]).unwrap();
    expm(&s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn format_round_trips_bitwise(n in 2usize..5, data in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 16)) {
        let a = matrix(n, &data);
        let back = parse_matrix(&format_matrix(&a)).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn solvers_agree_when_convex(raw in prop::collection::vec(0.2f64..3.0, 2..7)) {
        let a = Spectrum::new(descending(raw)).unwrap();
        prop_assume!(a.prod() < 0.9);
        let opts = SolveOptions::default();
        let reference = project_spectrum(&a, Some(Algorithm::Bisection), &opts).unwrap().solution;
        prop_assert!(reference.is_converged());
        for alg in [Algorithm::NewtonLog, Algorithm::NewtonHyp, Algorithm::Composite] {
            let s = project_spectrum(&a, Some(alg), &opts).unwrap().solution;
            // composite may legitimately stall near the origin; Newton may not here
            if alg == Algorithm::Composite && !s.is_converged() {
                continue;
            }
            prop_assert!(s.is_converged(), "{alg} did not converge");
            for (x, y) in s.point.p.iter().zip(&reference.point.p) {
                prop_assert!((x - y).abs() <= 1e-6, "{alg}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn default_result_is_a_feasible_stationary_point(raw in prop::collection::vec(0.3f64..4.0, 2..6)) {
        // global optimality is not certified for prod(a) > 1, n >= 3
        let a = Spectrum::new(descending(raw)).unwrap();
        let s = project_spectrum(&a, None, &SolveOptions::default()).unwrap().solution;
        prop_assert!(s.is_converged());
        let scale = 1.0 + a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(s.point.residual <= 1e-7 * scale);
        prop_assert!((s.point.p.iter().product::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn bisection_is_the_closest_quartic_root(a1 in 1.0f64..5.0, t in 0.0f64..1.0) {
        let a2 = 1.0 / a1 + t * (a1 - 1.0 / a1);
        let a = Spectrum::new(vec![a1, a2]).unwrap();
        let s = project_spectrum(&a, Some(Algorithm::Bisection), &SolveOptions::default()).unwrap().solution;
        let roots = oracle_quartic_2d([a1, a2]);
        let nearest = roots
            .iter()
            .filter(|r| r.is_positive())
            .map(|r| r.distance)
            .fold(f64::INFINITY, f64::min);
        prop_assert!((distance(&a, &s.point.p) - nearest).abs() <= 1e-7);
    }

    #[test]
    fn orthogonal_invariance(n in 2usize..5, m in prop::collection::vec(-0.5f64..0.5, 16),
                             q in prop::collection::vec(-1.0f64..1.0, 16), r in prop::collection::vec(-1.0f64..1.0, 16)) {
        // det(expm(M)) = exp(tr M) < 1 keeps the problem convex and the minimizer unique
        let shift = MatrixN::identity(n).scale(-0.3);
        let a = expm(&(&matrix(n, &m) + &shift)).unwrap();
        let (q, r) = (orthogonal(n, &q), orthogonal(n, &r));
        let opts = SolveOptions::default();
        let p = project(&a, None, &opts).unwrap().p_matrix;
        let rotated = project(&q.matmul(&a).matmul(&r.transpose()), None, &opts).unwrap().p_matrix;
        let expected = q.matmul(&p).matmul(&r.transpose());
        prop_assert!((&rotated - &expected).max_abs() <= 1e-8 * (1.0 + p.max_abs()));
    }

    #[test]
    fn block_solve_satisfies_the_system(raw in prop::collection::vec(0.3f64..3.0, 2..6), lambda in -2.0f64..2.0,
                                        entries in prop::collection::vec(-1.0f64..1.0, 25)) {
        let sigma = descending(raw);
        let n = sigma.len();
        prop_assume!(check_well_posed(&sigma, lambda).is_ok());
        let r = matrix(n, &entries);
        for mode in [SensitivityMode::Block, SensitivityMode::Dense] {
            let sol = solve_sensitivity(&sigma, lambda, &r, mode).unwrap();
            prop_assert!(sensitivity_residual(&sigma, lambda, &r, &sol) <= 1e-9 * (1.0 + sol.delta_y.max_abs()));
        }
    }

    #[test]
    fn sensitivity_operator_is_linear(raw in prop::collection::vec(0.3f64..3.0, 2..5), lambda in -2.0f64..2.0,
                                      x in prop::collection::vec(-1.0f64..1.0, 16), y in prop::collection::vec(-1.0f64..1.0, 16),
                                      c in -3.0f64..3.0) {
        let sigma = descending(raw);
        let n = sigma.len();
        let (x, y) = (matrix(n, &x), matrix(n, &y));
        let lhs = apply_s(&sigma, lambda, &(&x + &y.scale(c)));
        let rhs = &apply_s(&sigma, lambda, &x) + &apply_s(&sigma, lambda, &y).scale(c);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn matrix_level_derivative_matches_diagonalized(n in 2usize..4, m in prop::collection::vec(-0.5f64..0.5, 9),
                                                    d in prop::collection::vec(-1.0f64..1.0, 9)) {
        let a = expm(&(&matrix(n, &m) + &MatrixN::identity(n).scale(-0.3))).unwrap();
        let da = matrix(n, &d);
        let proj = project(&a, None, &SolveOptions::default()).unwrap();
        prop_assume!(check_well_posed(&proj.p_diag, proj.lambda).is_ok());
        let diag = projection_derivative(&a, &da, &proj).unwrap();
        let (dp, dl) = matrix_level_derivative(&proj.p_matrix, proj.lambda, &da).unwrap();
        let scale = 1.0 + dp.max_abs();
        prop_assert!((&dp - &diag.delta_p).max_abs() <= 1e-9 * scale);
        prop_assert!((dl - diag.delta_lambda).abs() <= 1e-9 * (1.0 + dl.abs()));
    }
}
