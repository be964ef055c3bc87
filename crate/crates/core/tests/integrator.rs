use num_complex::Complex64 as C64;
use optomech::integrator::{converge, integrate, FnGenerator, IntegrationConfig, ProtocolGenerator};
use optomech::model::{build_dynamic_matrix, ModeState, SystemParams};
use optomech::pulses::{PulseOrdering, Sin4Schedule};
use optomech::Error;
use proptest::prelude::*;

fn sin4_generator(params: SystemParams) -> ProtocolGenerator {
    let schedule = Sin4Schedule::new(100.0, 0.2, 1.0, PulseOrdering::Counterintuitive).unwrap();
    ProtocolGenerator::new(params, schedule.into(), None).unwrap()
}

fn state(v: [f64; 6]) -> ModeState {
    ModeState::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5]))
}

fn final_of(g: &ProtocolGenerator, init: &ModeState, dt: f64) -> ModeState {
    let cfg = IntegrationConfig::new(0.0, 1.2, dt, 1_000_000).unwrap();
    *integrate(g, init, &cfg).unwrap().final_state().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_is_linear(
        x in proptest::array::uniform6(-1.0..1.0f64),
        y in proptest::array::uniform6(-1.0..1.0f64),
        re in -2.0..2.0f64, im in -2.0..2.0f64,
    ) {
        let g = sin4_generator(SystemParams::uniform(0.5).unwrap());
        let (x, y) = (state(x), state(y));
        let s = C64::new(re, im);
        let combined = ModeState::from_vector(&(x.to_vector() + y.to_vector() * s));
        let lhs = final_of(&g, &combined, 1e-3).to_vector();
        let rhs = final_of(&g, &x, 1e-3).to_vector() + final_of(&g, &y, 1e-3).to_vector() * s;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn undamped_evolution_conserves_norm(x in proptest::array::uniform6(-1.0..1.0f64)) {
        let init = state(x);
        prop_assume!(init.norm() > 1e-3);
        let g = sin4_generator(SystemParams::undamped());
        let out = final_of(&g, &init, 1.25e-4);
        prop_assert!((out.norm() - init.norm()).abs() <= 1e-9 * init.norm());
    }

    #[test]
    fn uniform_damping_factors_out(kappa in 0.0..3.0f64) {
        let bare = final_of(&sin4_generator(SystemParams::undamped()), &ModeState::cavity1(), 1.25e-4);
        let damped = final_of(&sin4_generator(SystemParams::uniform(kappa).unwrap()), &ModeState::cavity1(), 1.25e-4);
        let expected = bare.to_vector() * C64::new((-kappa * 1.2 / 2.0).exp(), 0.0);
        prop_assert!((damped.to_vector() - expected).norm() <= 1e-10);
    }
}

#[test]
fn constant_coupling_gives_rabi_oscillation() {
    let g = 3.0;
    let m = build_dynamic_matrix(&SystemParams::undamped(), g, 0.0).unwrap();
    let generator = FnGenerator(move |_t| m);
    let cfg = IntegrationConfig::new(0.0, 2.0, 1e-3, 10).unwrap();
    let traj = integrate(&generator, &ModeState::cavity1(), &cfg).unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        assert!((s.a1 - C64::new((g * t).cos(), 0.0)).norm() < 1e-10);
        assert!((s.b - C64::new(0.0, -(g * t).sin())).norm() < 1e-10);
        assert!(s.a2.norm() < 1e-14);
    }
}

#[test]
fn global_error_is_fourth_order() {
    let g = sin4_generator(SystemParams::undamped());
    let reference = final_of(&g, &ModeState::cavity1(), 1.2 / 16000.0).to_vector();
    let errors: Vec<f64> = [400.0, 800.0, 1600.0]
        .iter()
        .map(|n| (final_of(&g, &ModeState::cavity1(), 1.2 / n).to_vector() - reference).norm())
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn records_endpoints_and_partial_last_step() {
    let g = sin4_generator(SystemParams::undamped());
    let cfg = IntegrationConfig::new(0.0, 1.2, 0.05, 7).unwrap();
    let traj = integrate(&g, &ModeState::cavity1(), &cfg).unwrap();
    assert_eq!(traj.times.first(), Some(&0.0));
    assert_eq!(traj.times.last(), Some(&1.2));
    let cfg = IntegrationConfig::new(0.0, 1.0, 0.3, 1).unwrap();
    assert_eq!(cfg.steps(), 4);
    let traj = integrate(&g, &ModeState::cavity1(), &cfg).unwrap();
    assert_eq!(traj.times.last(), Some(&1.0));
}

#[test]
fn convergence_meets_its_tolerance() {
    let g = sin4_generator(SystemParams::uniform(0.2).unwrap());
    let cfg = IntegrationConfig::new(0.0, 1.2, 1.2 / 1000.0, 10).unwrap();
    let run = converge(&g, &ModeState::cavity1(), &cfg).unwrap();
    assert!(run.estimate <= 1e-9, "estimate {}", run.estimate);
}

#[test]
fn blow_up_is_reported_as_divergence() {
    let generator = FnGenerator(|t: f64| {
        let m = build_dynamic_matrix(&SystemParams::undamped(), 1.0, 0.0).unwrap();
        if t > 0.5 { m * C64::new(f64::NAN, 0.0) } else { m }
    });
    let cfg = IntegrationConfig::new(0.0, 1.0, 0.1, 1).unwrap();
    match integrate(&generator, &ModeState::cavity1(), &cfg) {
        Err(Error::Divergence { last_good_t }) => assert!((last_good_t - 0.5).abs() < 1e-12),
        other => panic!("expected divergence, got {other:?}"),
    }
}
