//! Fixed-step classical Runge-Kutta integration of `i dA/dt = M(t) A`.

use serde::{Deserialize, Serialize};

use crate::counterdiabatic::{cd_matrix_with, theta, CdConvention};
use crate::error::{Error, Result};
use crate::model::{build_dynamic_matrix, ModeState, SystemParams};
use crate::pulses::{PulseSample, Schedule};
use crate::{c, exec, Mat3, Vec3, I};

/// Steps per protocol duration used when no step is given.
pub const DEFAULT_STEPS: usize = 4000;
/// Target for [`converge`]: max pointwise amplitude difference between `dt` and `dt/2`.
pub const CONVERGENCE_TOL: f64 = 1e-9;
pub const MAX_HALVINGS: u32 = 6;

/// A time-dependent complex 3×3 generator.
pub trait Generator: Sync {
    fn matrix(&self, t: f64) -> Result<Mat3>;

    /// Couplings and mixing rate at `t`, when the generator comes from a schedule.
    fn diagnostics(&self, _t: f64) -> Result<Option<(PulseSample, f64)>> {
        Ok(None)
    }
}

/// Wraps a plain closure `t -> M(t)`.
pub struct FnGenerator<F>(pub F);

impl<F> Generator for FnGenerator<F>
where
    F: Fn(f64) -> Mat3 + Sync,
{
    fn matrix(&self, t: f64) -> Result<Mat3> {
        Ok((self.0)(t))
    }
}

/// `N(g(t))`, optionally plus the counterdiabatic correction.
#[derive(Debug, Clone)]
pub struct ProtocolGenerator {
    pub params: SystemParams,
    pub schedule: Schedule,
    pub counterdiabatic: Option<CdConvention>,
    floor: f64,
}

impl ProtocolGenerator {
    pub fn new(params: SystemParams, schedule: Schedule, counterdiabatic: Option<CdConvention>) -> Result<Self> {
        params.validate()?;
        let floor = schedule.coupling_floor();
        Ok(Self { params, schedule, counterdiabatic, floor })
    }

    pub fn coupling_floor(&self) -> f64 {
        self.floor
    }
}

impl Generator for ProtocolGenerator {
    fn matrix(&self, t: f64) -> Result<Mat3> {
        let p = self.schedule.sample(t)?;
        let n = build_dynamic_matrix(&self.params, p.g1, p.g2)?;
        Ok(match self.counterdiabatic {
            Some(conv) => n + cd_matrix_with(theta(&p, self.floor), conv),
            None => n,
        })
    }

    fn diagnostics(&self, t: f64) -> Result<Option<(PulseSample, f64)>> {
        let p = self.schedule.sample(t)?;
        Ok(Some((p, theta(&p, self.floor))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl IntegrationConfig {
    pub fn new(t0: f64, t1: f64, dt: f64, record_every: usize) -> Result<Self> {
        let cfg = Self { t0, t1, dt, record_every };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cover `span` with `DEFAULT_STEPS` steps, recording every step.
    pub fn for_span(span: (f64, f64)) -> Result<Self> {
        Self::new(span.0, span.1, (span.1 - span.0) / DEFAULT_STEPS as f64, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0;
        if !ok {
            return Err(Error::InvalidArgument(format!("need t1 > t0, got [{}, {}]", self.t0, self.t1)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t1 - self.t0) {
            return Err(Error::InvalidArgument(format!(
                "dt must lie in (0, t1 - t0], got {}",
                self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps. When the span is not an integer multiple of `dt` the
    /// last step is shortened to land exactly on `t1`.
    pub fn steps(&self) -> usize {
        let ratio = (self.t1 - self.t0) / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-12 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    fn time(&self, k: usize, steps: usize) -> f64 {
        if k == steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    fn halved(&self) -> Self {
        Self { dt: self.dt / 2.0, record_every: self.record_every * 2, ..*self }
    }
}

/// Recorded solution: amplitudes plus per-time diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeState>,
    /// Couplings at each recorded time; zeros for generators without a schedule.
    pub pulses: Vec<PulseSample>,
    pub theta: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&ModeState> {
        self.states.last()
    }

    pub fn final_populations(&self) -> Option<[f64; 3]> {
        self.populations.last().copied()
    }

    fn push<G: Generator + ?Sized>(&mut self, generator: &G, t: f64, state: ModeState) -> Result<()> {
        let (pulse, th) = generator.diagnostics(t)?.unwrap_or_default();
        self.times.push(t);
        self.states.push(state);
        self.pulses.push(pulse);
        self.theta.push(th);
        self.populations.push(state.populations());
        Ok(())
    }
}

fn derivative(m: &Mat3, a: &Vec3) -> Vec3 {
    (m * a) * (-I)
}

/// Integrate with classical RK4, sampling the generator at `t`, `t + h/2` and
/// `t + h`. The first and last times are always recorded.
pub fn integrate<G: Generator + ?Sized>(
    generator: &G,
    initial: &ModeState,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if !initial.is_finite() {
        return Err(Error::InvalidArgument("initial state has non-finite amplitudes".into()));
    }
    let steps = config.steps();
    let mut traj = Trajectory::default();
    let mut a = initial.to_vector();
    let mut t = config.t0;
    traj.push(generator, t, *initial)?;
    let half = c(0.5);

    for k in 1..=steps {
        let t_next = config.time(k, steps);
        let h = t_next - t;
        let mid = t + 0.5 * h;
        let m_start = generator.matrix(t)?;
        let m_mid = generator.matrix(mid)?;
        let m_end = generator.matrix(t_next)?;
        let hc = c(h);
        let k1 = derivative(&m_start, &a);
        let k2 = derivative(&m_mid, &(a + k1 * hc * half));
        let k3 = derivative(&m_mid, &(a + k2 * hc * half));
        let k4 = derivative(&m_end, &(a + k3 * hc));
        let next = a + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / c(6.0));
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence { last_good_t: t });
        }
        a = next;
        t = t_next;
        if k % config.record_every == 0 || k == steps {
            traj.push(generator, t, ModeState::from_vector(&a))?;
        }
    }
    Ok(traj)
}

/// Result of [`converge`].
#[derive(Debug, Clone)]
pub struct Converged {
    pub trajectory: Trajectory,
    /// Max pointwise amplitude difference between the last two step sizes.
    pub estimate: f64,
    /// Step size of the returned trajectory.
    pub dt: f64,
    pub halvings: u32,
}

/// Largest `‖A_coarse(t) − A_fine(t)‖` over times recorded by both runs.
pub fn max_difference(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < coarse.len() && j < fine.len() {
        let (a, b) = (coarse.times[i], fine.times[j]);
        if a == b {
            let d = (coarse.states[i].to_vector() - fine.states[j].to_vector()).norm();
            worst = worst.max(d);
            i += 1;
            j += 1;
        } else if a < b {
            i += 1;
        } else {
            j += 1;
        }
    }
    worst
}

/// Integrate at `dt` and `dt/2`, halving until the two agree to
/// [`CONVERGENCE_TOL`] or [`MAX_HALVINGS`] extra halvings are exhausted.
pub fn converge<G: Generator + ?Sized>(
    generator: &G,
    initial: &ModeState,
    config: &IntegrationConfig,
) -> Result<Converged> {
    converge_with(generator, initial, config, CONVERGENCE_TOL, MAX_HALVINGS)
}

pub fn converge_with<G: Generator + ?Sized>(
    generator: &G,
    initial: &ModeState,
    config: &IntegrationConfig,
    tolerance: f64,
    max_halvings: u32,
) -> Result<Converged> {
    let mut cfg = config.halved();
    let (coarse, fine) = exec::join(
        || integrate(generator, initial, config),
        || integrate(generator, initial, &cfg),
    );
    let mut coarse = coarse?;
    let mut fine = fine?;
    let mut halvings = 0;
    loop {
        let estimate = max_difference(&coarse, &fine);
        if estimate <= tolerance {
            return Ok(Converged { trajectory: fine, estimate, dt: cfg.dt, halvings });
        }
        if halvings == max_halvings {
            return Err(Error::Accuracy { estimate, tolerance, dt: cfg.dt });
        }
        halvings += 1;
        cfg = cfg.halved();
        coarse = fine;
        fine = integrate(generator, initial, &cfg)?;
    }
}
