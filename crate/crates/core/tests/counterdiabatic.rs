mod common;

use common::{central_difference, central_difference_vec};
use num_complex::Complex64 as C64;
use optomech::counterdiabatic::{cd_matrix_with, driven_generator_with, theta, transitionless_correction, CdConvention};
use optomech::model::{labeled_eigenvectors, total_coupling, SystemParams};
use optomech::pulses::{PulseOrdering, Schedule, Sin4Schedule};
use proptest::prelude::*;

fn schedule() -> Schedule {
    Sin4Schedule::new(50.0, 0.2, 1.0, PulseOrdering::Counterintuitive).unwrap().into()
}

proptest! {
    #[test]
    fn mixing_rate_is_the_derivative_of_the_mixing_angle(t in 0.25..0.95f64) {
        let s = schedule();
        let p = s.sample(t).unwrap();
        let angle = |u: f64| {
            let q = s.sample(u).unwrap();
            q.g1.atan2(q.g2)
        };
        let fd = central_difference(angle, t, 1e-6);
        let th = theta(&p, s.coupling_floor());
        prop_assert!((th - fd).abs() <= 1e-5 * th.abs().max(1.0));
    }

    #[test]
    fn full_correction_drives_each_eigenvector_exactly(t in 0.25..0.95f64, m in 0usize..3) {
        // i dv/dt = (N + H) v − E v for every instantaneous eigenvector.
        let s = schedule();
        let p = s.sample(t).unwrap();
        let h = driven_generator_with(&SystemParams::undamped(), &p, s.coupling_floor(), CdConvention::Definition)
            .unwrap();
        let vec_at = |u: f64| {
            let q = s.sample(u).unwrap();
            labeled_eigenvectors(q.g1, q.g2).unwrap()[m]
        };
        let g0 = total_coupling(p.g1, p.g2).unwrap();
        let energy = [g0, -g0, 0.0][m];
        let v = vec_at(t);
        let lhs = central_difference_vec(vec_at, t, 1e-6) * C64::new(0.0, 1.0);
        let rhs = h * v - v * C64::new(energy, 0.0);
        prop_assert!((lhs - rhs).norm() <= 1e-5 * g0.max(1.0), "{}", (lhs - rhs).norm());
    }

    #[test]
    fn correction_equals_the_eigenvector_sum(t in 0.25..0.95f64) {
        let s = schedule();
        let p = s.sample(t).unwrap();
        let from_vectors = transitionless_correction(&p).unwrap();
        let closed = cd_matrix_with(theta(&p, s.coupling_floor()), CdConvention::Definition);
        prop_assert!((from_vectors - closed).norm() <= 1e-10 * from_vectors.norm().max(1.0));
    }
}

#[test]
fn correction_only_couples_the_cavities() {
    let s = schedule();
    let p = s.sample(0.6).unwrap();
    let h = transitionless_correction(&p).unwrap();
    for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1), (0, 0), (1, 1), (2, 2)] {
        assert!(h[(i, j)].norm() < 1e-12, "entry ({i},{j}) = {}", h[(i, j)]);
    }
    assert!((h[(0, 2)] + h[(2, 0)]).norm() < 1e-12);
}

#[test]
fn regularized_rate_vanishes_below_the_floor() {
    let p = optomech::pulses::PulseSample::new(1e-12, 0.0, 1.0, 1.0);
    assert_eq!(theta(&p, 1e-9), 0.0);
}
