//! Transfer diagnostics and the energetic cost of counterdiabatic driving.
//!
//! The cost is the time-averaged norm `C = (1/T) ∫ ‖H(t)‖ dt` of the driven
//! generator `H = N + H_CD`. It is computed two ways:
//!
//! * spectrally, `∂t C = sqrt(Σm [E²m + μm])` with the uniform-damping
//!   eigenvalues `E`, taking the real part of `Σ E²m`, which reduces to
//!   `sqrt(2 g0² − 3κ²/4 + 2ϑ²)`;
//! * directly, as the Frobenius norm `sqrt(Tr[H†H])` of the matrix, which for
//!   the printed correction is `sqrt(2 g0² + 3κ²/4 + ϑ²/2)`.
//!
//! The two disagree whenever `κ > 0` or `ϑ ≠ 0`. Both are reported and the
//! disagreement is flagged rather than reconciled.

use serde::{Deserialize, Serialize};

use crate::counterdiabatic::{driven_generator_with, eigenvector_derivatives, theta, CdConvention};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::{eigensystem_damped_uniform, labeled_eigenvectors, ModeState, SystemParams};
use crate::pulses::{PulseSample, Schedule};
use crate::{exec, C64};

/// Minimum Simpson node count for [`cost_integral`].
pub const MIN_QUADRATURE_NODES: usize = 2001;
pub const QUADRATURE_RTOL: f64 = 1e-8;
const MAX_QUADRATURE_DOUBLINGS: u32 = 12;

/// Relative threshold on `max |spectral − frobenius|` for raising the discrepancy flag.
pub const DISCREPANCY_RTOL: f64 = 1e-9;

/// Fig. 4 damping ratio `κ/g0`.
pub const FIG4_KAPPA_RATIO: f64 = 0.01;

/// The three modes, indexing `[a1, b, a2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    A1,
    B,
    A2,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::A1 => 0,
            Mode::B => 1,
            Mode::A2 => 2,
        }
    }
}

pub fn populations(state: &ModeState) -> [f64; 3] {
    state.populations()
}

/// Final-time population of `target`.
pub fn transfer_fidelity(traj: &Trajectory, target: Mode) -> Result<f64> {
    traj.final_populations()
        .map(|p| p[target.index()])
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))
}

/// `μm = ⟨∂λm|∂λm⟩ − |⟨λm|∂λm⟩|²` for `[λ1, λ2, λ3]` (bright +, bright −, dark).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuValues {
    pub mu: [f64; 3],
}

impl MuValues {
    pub fn sum(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// Evaluated from the analytic eigenvectors and their time derivatives; for
/// this model the result is `(ϑ²/2, ϑ²/2, ϑ²)`.
pub fn mu_values(sample: &PulseSample) -> Result<MuValues> {
    let vecs = labeled_eigenvectors(sample.g1, sample.g2)?;
    let dvecs = eigenvector_derivatives(sample)?;
    let mut mu = [0.0; 3];
    for (m, (v, dv)) in mu.iter_mut().zip(vecs.iter().zip(&dvecs)) {
        let overlap = v.dotc(dv);
        *m = (dv.norm_squared() - overlap.norm_sqr()).max(0.0);
    }
    Ok(MuValues { mu })
}

/// `sqrt(2 g0² − 3κ²/4 + 2ϑ²)`; errors on a negative radicand.
pub fn spectral_cost_formula(g0: f64, kappa: f64, theta: f64) -> Result<f64> {
    let radicand = 2.0 * g0 * g0 - 0.75 * kappa * kappa + 2.0 * theta * theta;
    if radicand < 0.0 || !radicand.is_finite() {
        return Err(Error::Domain { radicand, g0, kappa, theta });
    }
    Ok(radicand.sqrt())
}

/// Instantaneous cost from the spectral closed form, with `ϑ` regularized
/// below `floor`.
pub fn cost_instantaneous_spectral(sample: &PulseSample, kappa: f64, floor: f64) -> Result<f64> {
    spectral_cost_formula(sample.g0(), kappa, theta(sample, floor))
}

/// `Re(Σ E²m) + Σ μm` rebuilt from the closed-form eigenvalues and
/// [`mu_values`]; equals the radicand of [`spectral_cost_formula`].
pub fn spectral_radicand(params: &SystemParams, sample: &PulseSample) -> Result<f64> {
    let es = eigensystem_damped_uniform(params, sample.g1, sample.g2)?;
    let energy: C64 = es.values.iter().map(|e| e * e).sum();
    Ok(energy.re + mu_values(sample)?.sum())
}

/// `sqrt(Tr[H†H])` of the driven generator with the printed correction.
pub fn cost_instantaneous_frobenius(params: &SystemParams, sample: &PulseSample, floor: f64) -> Result<f64> {
    cost_instantaneous_frobenius_with(params, sample, floor, CdConvention::Printed)
}

pub fn cost_instantaneous_frobenius_with(
    params: &SystemParams,
    sample: &PulseSample,
    floor: f64,
    convention: CdConvention,
) -> Result<f64> {
    Ok(driven_generator_with(params, sample, floor, convention)?.norm())
}

/// Which instantaneous cost to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostVariant {
    Spectral,
    Frobenius(CdConvention),
}

fn uniform_kappa(params: &SystemParams) -> Result<f64> {
    params.uniform_rate().ok_or_else(|| {
        Error::Unsupported("the spectral cost formula needs kappa1 == kappa2 == gamma".into())
    })
}

fn instantaneous(schedule: &Schedule, params: &SystemParams, variant: CostVariant, t: f64) -> Result<f64> {
    let floor = schedule.coupling_floor();
    let p = schedule.sample(t)?;
    match variant {
        CostVariant::Spectral => cost_instantaneous_spectral(&p, uniform_kappa(params)?, floor),
        CostVariant::Frobenius(conv) => cost_instantaneous_frobenius_with(params, &p, floor, conv),
    }
}

fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n - 1])
}

/// Time average of the chosen instantaneous cost over the schedule's span,
/// by composite Simpson with node doubling until successive estimates agree
/// to [`QUADRATURE_RTOL`].
pub fn cost_integral(schedule: &Schedule, params: &SystemParams, variant: CostVariant) -> Result<f64> {
    params.validate()?;
    if let CostVariant::Spectral = variant {
        uniform_kappa(params)?;
    }
    let (a, b) = schedule.span();
    let duration = b - a;
    let mut intervals = MIN_QUADRATURE_NODES - 1;
    let node = |i: usize, n: usize| if i == n { b } else { a + duration * i as f64 / n as f64 };
    let mut values: Vec<f64> = exec::map_range(intervals + 1, |i| {
        instantaneous(schedule, params, variant, node(i, intervals))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut estimate = simpson(&values, duration / intervals as f64);

    for _ in 0..MAX_QUADRATURE_DOUBLINGS {
        let finer = intervals * 2;
        let mids: Vec<f64> = exec::map_range(intervals, |i| {
            instantaneous(schedule, params, variant, node(2 * i + 1, finer))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut merged = Vec::with_capacity(finer + 1);
        for (i, v) in values.iter().enumerate() {
            merged.push(*v);
            if i < mids.len() {
                merged.push(mids[i]);
            }
        }
        let next = simpson(&merged, duration / finer as f64);
        let converged = (next - estimate).abs() <= QUADRATURE_RTOL * next.abs();
        values = merged;
        intervals = finer;
        estimate = next;
        if converged {
            return Ok(estimate / duration);
        }
    }
    Err(Error::Accuracy {
        estimate: estimate / duration,
        tolerance: QUADRATURE_RTOL,
        dt: duration / intervals as f64,
    })
}

/// Both cost variants for one schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// Time average of the Frobenius norm with the printed correction.
    pub c_frobenius: f64,
    /// Time average of the spectral closed form.
    pub c_spectral: f64,
    /// Time average of the Frobenius norm with the full-strength correction.
    pub c_frobenius_definition: f64,
    pub max_discrepancy: f64,
    pub discrepancy_flag: bool,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub instantaneous_spectral: Vec<f64>,
    #[serde(skip)]
    pub instantaneous_frobenius: Vec<f64>,
    #[serde(skip)]
    pub instantaneous_frobenius_definition: Vec<f64>,
}

/// Instantaneous costs on `nodes` evenly spaced times plus both integrals.
pub fn cost_report(schedule: &Schedule, params: &SystemParams, nodes: usize) -> Result<CostReport> {
    if nodes < 2 {
        return Err(Error::InvalidArgument("cost report needs at least 2 nodes".into()));
    }
    let kappa = uniform_kappa(params)?;
    let floor = schedule.coupling_floor();
    let (a, b) = schedule.span();
    let times: Vec<f64> = (0..nodes)
        .map(|i| if i + 1 == nodes { b } else { a + (b - a) * i as f64 / (nodes - 1) as f64 })
        .collect();
    let rows = exec::map(&times, |&t| -> Result<[f64; 3]> {
        let p = schedule.sample(t)?;
        Ok([
            cost_instantaneous_spectral(&p, kappa, floor)?,
            cost_instantaneous_frobenius_with(params, &p, floor, CdConvention::Printed)?,
            cost_instantaneous_frobenius_with(params, &p, floor, CdConvention::Definition)?,
        ])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let spectral: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let frob: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let frob_def: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let max_discrepancy = spectral.iter().zip(&frob).map(|(p, f)| (p - f).abs()).fold(0.0, f64::max);
    let max_value = spectral.iter().chain(&frob).fold(0.0_f64, |m, v| m.max(v.abs()));

    Ok(CostReport {
        c_frobenius: cost_integral(schedule, params, CostVariant::Frobenius(CdConvention::Printed))?,
        c_spectral: cost_integral(schedule, params, CostVariant::Spectral)?,
        c_frobenius_definition: cost_integral(schedule, params, CostVariant::Frobenius(CdConvention::Definition))?,
        max_discrepancy,
        discrepancy_flag: max_discrepancy > DISCREPANCY_RTOL * max_value,
        times,
        instantaneous_spectral: spectral,
        instantaneous_frobenius: frob,
        instantaneous_frobenius_definition: frob_def,
    })
}

/// `∂t C / g0` from the spectral formula with `κ = kappa_ratio · g0` and fixed `ϑ`.
pub fn fig4_curve(g0_grid: &[f64], theta: f64, kappa_ratio: f64) -> Result<Vec<f64>> {
    if let Some(g) = g0_grid.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidArgument(format!("g0 values must be positive, got {g}")));
    }
    exec::map(g0_grid, |&g0| spectral_cost_formula(g0, kappa_ratio * g0, theta).map(|c| c / g0))
        .into_iter()
        .collect()
}
