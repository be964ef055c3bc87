mod common;

use common::{eigenvalues_oracle, multiset_distance};
use num_complex::Complex64 as C64;
use optomech::model::{
    build_dynamic_matrix, dark_mode, eigensystem_damped_uniform, eigensystem_numeric, eigensystem_undamped,
    labeled_eigenvectors, total_coupling, SystemParams,
};
use optomech::Mat3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol(m: &Mat3) -> f64 {
    1e-10 * m.norm().max(1.0)
}

#[test]
fn closed_form_numeric_and_char_poly_agree_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let g1 = rng.random_range(-50.0..50.0);
        let g2 = rng.random_range(-50.0..50.0);
        let kappa = rng.random_range(0.0..5.0);
        let params = SystemParams::uniform(kappa).unwrap();
        let m = build_dynamic_matrix(&params, g1, g2).unwrap();
        let closed = eigensystem_damped_uniform(&params, g1, g2).unwrap();
        let numeric = eigensystem_numeric(&m).unwrap();
        let oracle = eigenvalues_oracle(&m);
        let t = tol(&m);
        assert!(closed.max_residual(&m) <= t, "closed residual {}", closed.max_residual(&m));
        assert!(numeric.max_residual(&m) <= t, "numeric residual {}", numeric.max_residual(&m));
        assert!(multiset_distance(&closed.values, &oracle) <= t);
        assert!(multiset_distance(&numeric.values, &oracle) <= t);
    }
}

#[test]
fn numeric_eigensolve_handles_non_uniform_damping() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let params = SystemParams::new(
            rng.random_range(0.0..4.0),
            rng.random_range(0.0..4.0),
            rng.random_range(0.0..4.0),
        )
        .unwrap();
        let m = build_dynamic_matrix(&params, rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))
            .unwrap();
        let numeric = eigensystem_numeric(&m).unwrap();
        assert!(numeric.max_residual(&m) <= tol(&m));
        assert!(multiset_distance(&numeric.values, &eigenvalues_oracle(&m)) <= tol(&m));
        for v in &numeric.vectors {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn undamped_spectrum_is_symmetric_with_dark_zero() {
    let e = eigensystem_undamped(3.0, 4.0).unwrap();
    let expected = [C64::new(-5.0, 0.0), C64::new(0.0, 0.0), C64::new(5.0, 0.0)];
    for (a, b) in e.values.iter().zip(&expected) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn degenerate_couplings_are_rejected() {
    assert!(total_coupling(0.0, 0.0).is_err());
    assert!(dark_mode(0.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn dynamic_matrix_is_complex_symmetric(
        g1 in -100.0..100.0f64, g2 in -100.0..100.0f64,
        k1 in 0.0..10.0f64, k2 in 0.0..10.0f64, gamma in 0.0..10.0f64,
    ) {
        let m = build_dynamic_matrix(&SystemParams::new(k1, k2, gamma).unwrap(), g1, g2).unwrap();
        prop_assert_eq!(m, m.transpose());
        prop_assert_eq!(m[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn uniform_damping_shifts_by_a_scalar(g1 in -100.0..100.0f64, g2 in -100.0..100.0f64, kappa in 0.0..10.0f64) {
        let damped = build_dynamic_matrix(&SystemParams::uniform(kappa).unwrap(), g1, g2).unwrap();
        let bare = build_dynamic_matrix(&SystemParams::undamped(), g1, g2).unwrap();
        let shift = Mat3::identity() * C64::new(0.0, -kappa / 2.0);
        prop_assert!((damped - (bare + shift)).norm() <= 1e-14 * damped.norm().max(1.0));
    }

    #[test]
    fn dark_mode_is_annihilated(g1 in -100.0..100.0f64, g2 in -100.0..100.0f64) {
        prop_assume!(g1.hypot(g2) > 1e-3);
        let g0 = total_coupling(g1, g2).unwrap();
        let m = build_dynamic_matrix(&SystemParams::undamped(), g1, g2).unwrap();
        let d = dark_mode(g1, g2).unwrap();
        prop_assert!((m * d).norm() <= 1e-12 * g0.max(1.0));
        prop_assert!(d[1].norm() == 0.0);
    }

    #[test]
    fn labeled_eigenvectors_are_orthonormal(g1 in -100.0..100.0f64, g2 in -100.0..100.0f64) {
        prop_assume!(g1.hypot(g2) > 1e-3);
        let v = labeled_eigenvectors(g1, g2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v[i].dotc(&v[j]) - C64::new(want, 0.0)).norm() < 1e-13);
            }
        }
    }
}
