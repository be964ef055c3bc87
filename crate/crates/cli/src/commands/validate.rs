//! Built-in property checks at fixed seeds.

use std::fmt::Write as _;

use optomech::counterdiabatic::{cd_matrix_with, theta, transitionless_correction, CdConvention};
use optomech::integrator::{converge, integrate, max_difference, IntegrationConfig, ProtocolGenerator, CONVERGENCE_TOL};
use optomech::invariant::{invariant_residual, LinearMixingAngles};
use optomech::metrics::{cost_instantaneous_frobenius, cost_instantaneous_spectral, spectral_radicand};
use optomech::model::{
    build_dynamic_matrix, dark_mode, eigensystem_damped_uniform, eigensystem_numeric, ModeState, SystemParams,
};
use optomech::pulses::{InvariantSchedule, PulseOrdering, Schedule, Sin4Schedule};
use optomech::{C64, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

const SEED: u64 = 20_240_601;
const DRAWS: usize = 500;

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Step used by the convergence check instead of the default.
    pub debug_dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

/// `(value, tolerance, passed, detail)`.
type Outcome = (f64, f64, bool, String);

pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    run: fn(&ValidateOptions) -> CliResult<Outcome>,
}

fn at_most(value: f64, tolerance: f64) -> Outcome {
    (value, tolerance, value <= tolerance, String::new())
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            name: "eigen-cross-check",
            description: "closed-form vs numerical eigensystems, uniform damping, random couplings",
            run: eigen_cross_check,
        },
        Check { name: "dark-mode-null", description: "dark mode is annihilated by the dynamic matrix", run: dark_null },
        Check {
            name: "invariant-residual",
            description: "dI/dt = i[I, N] for the linear-mixing invariant, 4001 nodes",
            run: invariant_identity,
        },
        Check { name: "rk4-order", description: "global error ratios under step halving lie in [8, 32]", run: rk4_order },
        Check { name: "norm-conservation", description: "undamped evolution keeps |A| = 1", run: norm_conservation },
        Check {
            name: "convergence",
            description: "run at dt agrees with dt/2 within 1e-9",
            run: convergence,
        },
        Check {
            name: "cd-transitionless",
            description: "corrected sin^4 run stays on the dark mode",
            run: cd_transitionless,
        },
        Check {
            name: "cd-eigenvector-sum",
            description: "closed-form correction equals i sum |d lambda><lambda|",
            run: cd_eigenvector_sum,
        },
        Check {
            name: "uniform-damping",
            description: "damped run equals undamped run times exp(-kappa t / 2)",
            run: uniform_damping,
        },
        Check {
            name: "cost-oracles",
            description: "spectral and Frobenius costs against independent recomputation",
            run: cost_oracles,
        },
    ]
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

fn fig2_schedule() -> Schedule {
    InvariantSchedule::new(0.1, 1.0).expect("valid constants").into()
}

fn eigen_cross_check(_: &ValidateOptions) -> CliResult<Outcome> {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let (g1, g2) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let params = SystemParams::uniform(rng.random_range(0.0..5.0))?;
        let m = build_dynamic_matrix(&params, g1, g2)?;
        let scale = m.norm().max(1.0);
        let closed = eigensystem_damped_uniform(&params, g1, g2)?;
        let numeric = eigensystem_numeric(&m)?;
        let mut gap: f64 = 0.0;
        for e in &numeric.values {
            let nearest = closed.values.iter().map(|c| (c - e).norm()).fold(f64::INFINITY, f64::min);
            gap = gap.max(nearest);
        }
        worst = worst.max(closed.max_residual(&m).max(numeric.max_residual(&m)).max(gap) / scale);
    }
    Ok(at_most(worst, 1e-10))
}

fn dark_null(_: &ValidateOptions) -> CliResult<Outcome> {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let (g1, g2): (f64, f64) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let m = build_dynamic_matrix(&SystemParams::undamped(), g1, g2)?;
        worst = worst.max((m * dark_mode(g1, g2)?).norm() / g1.hypot(g2));
    }
    Ok(at_most(worst, 1e-12))
}

fn invariant_identity(_: &ValidateOptions) -> CliResult<Outcome> {
    let schedule = fig2_schedule();
    let angles = LinearMixingAngles { xi: 0.1, period: 1.0 };
    let grid: Vec<f64> = (0..4001).map(|k| k as f64 / 4000.0).collect();
    let residual = invariant_residual(&schedule, &angles, 1.0, &grid)?;
    Ok(at_most(residual, 1e-8 * schedule.amplitude_scale()))
}

fn final_state(generator: &ProtocolGenerator, dt: f64) -> CliResult<Vec3> {
    let cfg = IntegrationConfig::new(0.0, 1.0, dt, usize::MAX)?;
    let traj = integrate(generator, &ModeState::cavity1(), &cfg)?;
    Ok(traj.final_state().map(|s| s.to_vector()).unwrap_or_else(Vec3::zeros))
}

/// Error ratios `e(dt)/e(dt/2)` for three halvings from `dt = T/50`.
pub fn rk4_error_ratios() -> CliResult<Vec<f64>> {
    let generator = ProtocolGenerator::new(SystemParams::undamped(), fig2_schedule(), None)?;
    let reference = final_state(&generator, 1.0 / 12_800.0)?;
    let errors = [50.0, 100.0, 200.0, 400.0]
        .iter()
        .map(|n| Ok((final_state(&generator, 1.0 / n)? - reference).norm()))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(errors.windows(2).map(|w| w[0] / w[1]).collect())
}

fn rk4_order(_: &ValidateOptions) -> CliResult<Outcome> {
    let ratios = rk4_error_ratios()?;
    let worst = ratios.iter().map(|r| (r.log2() - 4.0).abs()).fold(0.0, f64::max);
    let ok = ratios.iter().all(|r| (8.0..=32.0).contains(r));
    let detail = ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ");
    Ok((worst, 1.0, ok, format!("ratios {detail}")))
}

fn norm_conservation(_: &ValidateOptions) -> CliResult<Outcome> {
    let generator = ProtocolGenerator::new(SystemParams::undamped(), fig2_schedule(), None)?;
    let cfg = IntegrationConfig::for_span((0.0, 1.0))?;
    let traj = integrate(&generator, &ModeState::cavity1(), &cfg)?;
    let drift = traj.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(at_most(drift, 1e-9))
}

fn convergence(opts: &ValidateOptions) -> CliResult<Outcome> {
    let generator = ProtocolGenerator::new(SystemParams::undamped(), fig2_schedule(), None)?;
    let mut cfg = IntegrationConfig::for_span((0.0, 1.0))?;
    if let Some(dt) = opts.debug_dt {
        cfg = IntegrationConfig::new(0.0, 1.0, dt, 1)?;
    }
    let fine = IntegrationConfig::new(0.0, 1.0, cfg.dt / 2.0, 2)?;
    let a = integrate(&generator, &ModeState::cavity1(), &cfg)?;
    let b = integrate(&generator, &ModeState::cavity1(), &fine)?;
    let (v, t, ok, _) = at_most(max_difference(&a, &b), CONVERGENCE_TOL);
    Ok((v, t, ok, format!("dt = {:e}", cfg.dt)))
}

/// Largest deviation of the normalized state from the dark direction over
/// recorded times with `g0` above the floor, and the final `|a2|²`.
pub fn dark_tracking(schedule: &Schedule, convention: CdConvention, dt: f64) -> CliResult<(f64, f64)> {
    let generator = ProtocolGenerator::new(SystemParams::undamped(), schedule.clone(), Some(convention))?;
    let t0 = crate::config::first_coupled_time(schedule)?;
    let p = schedule.sample(t0)?;
    let initial = ModeState::from_vector(&dark_mode(p.g1, p.g2)?);
    let span = schedule.span();
    let cfg = IntegrationConfig::new(span.0, span.1, dt, 1)?;
    let run = converge(&generator, &initial, &cfg)?;
    let floor = schedule.coupling_floor();
    let mut worst: f64 = 0.0;
    for (s, g) in run.trajectory.states.iter().zip(&run.trajectory.pulses) {
        if g.g0() <= floor {
            continue;
        }
        let a = s.to_vector();
        let a = a / C64::new(a.norm(), 0.0);
        let d = dark_mode(g.g1, g.g2)?;
        worst = worst.max((a - d * d.dotc(&a)).norm());
    }
    let last = run.trajectory.final_populations().map(|p| p[2]).unwrap_or(0.0);
    Ok((worst, last))
}

fn cd_transitionless(_: &ValidateOptions) -> CliResult<Outcome> {
    let schedule: Schedule = Sin4Schedule::new(100.0, 0.1, 1.0, PulseOrdering::Counterintuitive)?.into();
    let (dev, last) = dark_tracking(&schedule, CdConvention::Definition, 1.1 / 4000.0)?;
    let ok = dev <= 1e-6 && (last - 1.0).abs() <= 1e-4;
    Ok((dev, 1e-6, ok, format!("final p_a2 = {last:.12}")))
}

fn cd_eigenvector_sum(_: &ValidateOptions) -> CliResult<Outcome> {
    let schedule: Schedule = Sin4Schedule::new(100.0, 0.1, 1.0, PulseOrdering::Counterintuitive)?.into();
    let floor = schedule.coupling_floor();
    let mut worst: f64 = 0.0;
    for k in 1..200 {
        let p = schedule.sample(0.1 + 0.9 * k as f64 / 200.0)?;
        let th = theta(&p, floor);
        let diff = (transitionless_correction(&p)? - cd_matrix_with(th, CdConvention::Definition)).norm();
        worst = worst.max(diff / th.abs().max(1.0));
    }
    Ok(at_most(worst, 1e-10))
}

fn uniform_damping(_: &ValidateOptions) -> CliResult<Outcome> {
    let kappa = 0.5;
    let cfg = IntegrationConfig::for_span((0.0, 1.0))?;
    let bare = ProtocolGenerator::new(SystemParams::undamped(), fig2_schedule(), None)?;
    let damped = ProtocolGenerator::new(SystemParams::uniform(kappa)?, fig2_schedule(), None)?;
    let a = integrate(&bare, &ModeState::cavity1(), &cfg)?;
    let b = integrate(&damped, &ModeState::cavity1(), &cfg)?;
    let worst = a
        .times
        .iter()
        .zip(a.states.iter().zip(&b.states))
        .map(|(t, (x, y))| (x.to_vector() * C64::new((-kappa * t / 2.0).exp(), 0.0) - y.to_vector()).norm())
        .fold(0.0, f64::max);
    Ok(at_most(worst, 1e-8))
}

fn cost_oracles(_: &ValidateOptions) -> CliResult<Outcome> {
    let schedule: Schedule = Sin4Schedule::new(40.0, 0.15, 1.0, PulseOrdering::Counterintuitive)?.into();
    let floor = schedule.coupling_floor();
    let mut rng = rng();
    let (mut spectral_err, mut frob_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..DRAWS {
        let p = schedule.sample(rng.random_range(0.2..0.95))?;
        let kappa = rng.random_range(0.0..1.0);
        let params = SystemParams::uniform(kappa)?;
        let th = theta(&p, floor);
        let spectral = cost_instantaneous_spectral(&p, kappa, floor)?.powi(2);
        let rebuilt = spectral_radicand(&params, &p)?;
        spectral_err = spectral_err.max((spectral - rebuilt).abs() / spectral.max(1.0));
        let entrywise = (2.0 * p.g0().powi(2) + 0.75 * kappa * kappa + th * th / 2.0).sqrt();
        let frob = cost_instantaneous_frobenius(&params, &p, floor)?;
        frob_err = frob_err.max((frob - entrywise).abs() / entrywise.max(1.0));
    }
    let ok = spectral_err <= 1e-10 && frob_err <= 1e-12;
    Ok((frob_err, 1e-12, ok, format!("spectral {spectral_err:.1e} (tol 1e-10)")))
}

pub fn list() -> String {
    let mut out = String::new();
    for c in checks() {
        let _ = writeln!(out, "{:<20} {}", c.name, c.description);
    }
    out
}

pub fn run_all(opts: &ValidateOptions) -> Vec<CheckResult> {
    let checks = checks();
    optomech::exec::map(&checks, |c| match (c.run)(opts) {
        Ok((value, tolerance, passed, detail)) => CheckResult { name: c.name, value, tolerance, passed, detail },
        Err(e) => CheckResult { name: c.name, value: f64::NAN, tolerance: f64::NAN, passed: false, detail: e.to_string() },
    })
}

pub fn table(results: &[CheckResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:<6} {:>12} {:>12}  detail", "check", "status", "value", "tolerance");
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{:<20} {:<6} {:>12.3e} {:>12.3e}  {}", r.name, status, r.value, r.tolerance, r.detail);
    }
    out
}

/// `validate`: print the table; fail with exit 1 if any check fails.
pub fn execute(opts: &ValidateOptions) -> CliResult<Vec<CheckResult>> {
    let results = run_all(opts);
    print!("{}", table(&results));
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(results)
}
