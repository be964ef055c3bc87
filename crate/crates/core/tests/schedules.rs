mod common;

use common::central_difference;
use optomech::pulses::{InvariantSchedule, PulseOrdering, Schedule, Sin4Schedule, TabulatedSchedule};
use proptest::prelude::*;

const H: f64 = 1e-6;

fn assert_derivatives(schedule: &Schedule, t: f64) {
    let p = schedule.sample(t).unwrap();
    let scale = schedule.amplitude_scale() / schedule.duration();
    let fd1 = central_difference(|s| schedule.sample(s).unwrap().g1, t, H);
    let fd2 = central_difference(|s| schedule.sample(s).unwrap().g2, t, H);
    assert!((p.dg1 - fd1).abs() <= 1e-5 * p.dg1.abs().max(scale), "dg1 {} vs {fd1} at {t}", p.dg1);
    assert!((p.dg2 - fd2).abs() <= 1e-5 * p.dg2.abs().max(scale), "dg2 {} vs {fd2} at {t}", p.dg2);
}

fn tabulated() -> Schedule {
    let times: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let g1 = times.iter().map(|t| 10.0 * (3.0 * t).sin()).collect();
    let g2 = times.iter().map(|t| 10.0 * (2.0 * t).cos()).collect();
    TabulatedSchedule::new(times, g1, g2).unwrap().into()
}

proptest! {
    #[test]
    fn sin4_derivatives_match_finite_differences(
        tau in -0.2..0.2f64, s in 0.001..0.999f64,
        ordering in prop_oneof![Just(PulseOrdering::AsPrinted), Just(PulseOrdering::Counterintuitive)],
    ) {
        let schedule: Schedule = Sin4Schedule::new(1000.0, tau, 1.0, ordering).unwrap().into();
        let (a, b) = schedule.span();
        assert_derivatives(&schedule, a + s * (b - a));
    }

    #[test]
    fn invariant_derivatives_match_finite_differences(xi in 0.05..1.4f64, s in 0.001..0.999f64) {
        let schedule: Schedule = InvariantSchedule::new(xi, 1.0).unwrap().into();
        assert_derivatives(&schedule, s);
    }

    #[test]
    fn tabulated_derivatives_match_finite_differences(s in 0.001..0.999f64) {
        assert_derivatives(&tabulated(), s);
    }

    #[test]
    fn invariant_total_coupling_is_constant(xi in 0.05..1.4f64, s in 0.0..1.0f64) {
        let schedule = InvariantSchedule::new(xi, 1.0).unwrap();
        let g0 = schedule.sample(s).unwrap().g0();
        let expected = std::f64::consts::FRAC_PI_2 / xi.tan();
        prop_assert!((g0 - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn sin4_peaks_are_offset_by_tau() {
    let tau = 0.1;
    let schedule = Sin4Schedule::new(1.0, tau, 1.0, PulseOrdering::AsPrinted).unwrap();
    let argmax = |f: &dyn Fn(f64) -> f64| {
        (0..=110_000)
            .map(|k| k as f64 * 1e-5)
            .max_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    };
    let p1 = argmax(&|t| schedule.sample(t).g1);
    let p2 = argmax(&|t| schedule.sample(t).g2);
    assert!(((p2 - p1).abs() - tau).abs() < 2e-5, "peaks at {p1} and {p2}");
}

#[test]
fn tabulated_reproduces_its_knots_and_rejects_extrapolation() {
    let schedule = tabulated();
    let p = schedule.sample(0.5).unwrap();
    assert!((p.g1 - 10.0 * 1.5f64.sin()).abs() < 1e-12);
    assert!(schedule.sample(1.01).is_err());
    assert!(schedule.sample(-0.01).is_err());
}

#[test]
fn tabulated_schedule_reads_csv() {
    let csv = "t,g1,g2\n0,0,1\n0.25,1,1\n0.5,2,1\n0.75,3,1\n1,4,1\n";
    let schedule = TabulatedSchedule::from_csv(csv.as_bytes()).unwrap();
    assert_eq!(schedule.span(), (0.0, 1.0));
    assert!((schedule.sample(0.6).unwrap().g1 - 2.4).abs() < 1e-12);
}
