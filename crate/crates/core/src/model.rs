//! The linearized three-mode optomechanical model.
//!
//! After linearization and the rotating-wave approximation the lab-frame
//! Hamiltonian is `H = Σ Δi ai†ai + gi (ai† b + ai b†) + ωm b†b`. On resonance
//! (`ωm = −Δ1 = −Δ2`, see [`LabFrameParams::resonance_ok`]) the amplitudes
//! `A = [a1, b, a2]` obey `i dA/dt = N A` in the interaction picture, with
//!
//! ```text
//!     | −iκ1/2   g1      0     |
//! N = |  g1     −iγ/2    g2    |
//!     |  0       g2     −iκ2/2 |
//! ```
//!
//! Noise inputs are dropped, so the model is a deterministic linear ODE.
//!
//! Undamped eigenvalues are `{0, ±g0}` with `g0 = sqrt(g1² + g2²)`. Some
//! printed versions of this analysis give `±g0/√2`; the characteristic
//! polynomial `−λ(λ² − g0²)` settles it.

use nalgebra::linalg::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::{c, Mat3, Vec3, C64, I};

/// Relative tolerance for treating the three damping rates as equal.
pub const UNIFORM_RTOL: f64 = 1e-12;

/// Relative tolerance for the resonance condition `ωm = −Δ`.
pub const RESONANCE_RTOL: f64 = 1e-9;

/// Convert a frequency quoted as "2π × f" with `f` in MHz to rad/μs.
pub fn angular_from_mhz(f_mhz: f64) -> f64 {
    std::f64::consts::TAU * f_mhz
}

/// Convert a frequency quoted as "2π × f" with `f` in Hz to rad/μs.
pub fn angular_from_hz(f_hz: f64) -> f64 {
    angular_from_mhz(f_hz * 1e-6)
}

/// Damping rates of the two cavities and the mechanical resonator (rad/μs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::undamped()
    }
}

impl SystemParams {
    pub fn new(kappa1: f64, kappa2: f64, gamma: f64) -> Result<Self> {
        let p = Self { kappa1, kappa2, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn undamped() -> Self {
        Self { kappa1: 0.0, kappa2: 0.0, gamma: 0.0 }
    }

    /// Equal damping `κ1 = κ2 = γ = κ`.
    pub fn uniform(kappa: f64) -> Result<Self> {
        Self::new(kappa, kappa, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa1", self.kappa1), ("kappa2", self.kappa2), ("gamma", self.gamma)] {
            ensure_finite(name, v)?;
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn uniform_damping(&self) -> bool {
        self.uniform_rate().is_some()
    }

    /// The common rate when all three rates agree to [`UNIFORM_RTOL`].
    pub fn uniform_rate(&self) -> Option<f64> {
        let lo = self.kappa1.min(self.kappa2).min(self.gamma);
        let hi = self.kappa1.max(self.kappa2).max(self.gamma);
        if hi - lo <= UNIFORM_RTOL * hi {
            Some(self.gamma)
        } else {
            None
        }
    }
}

/// Lab-frame detunings and mechanical frequency (rad/μs). Only used to check
/// that the interaction-picture model applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabFrameParams {
    pub delta1: f64,
    pub delta2: f64,
    pub omega_m: f64,
}

impl LabFrameParams {
    /// `ωm == −Δ1 == −Δ2` within [`RESONANCE_RTOL`].
    pub fn resonance_ok(&self) -> bool {
        let scale = self.omega_m.abs().max(self.delta1.abs()).max(self.delta2.abs());
        let tol = RESONANCE_RTOL * scale;
        [self.delta1, self.delta2, self.omega_m].iter().all(|v| v.is_finite())
            && (self.omega_m + self.delta1).abs() <= tol
            && (self.omega_m + self.delta2).abs() <= tol
    }
}

/// Mode amplitudes `[a1, b, a2]` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub a1: C64,
    pub b: C64,
    pub a2: C64,
}

impl ModeState {
    pub const fn new(a1: C64, b: C64, a2: C64) -> Self {
        Self { a1, b, a2 }
    }

    /// All excitation in cavity 1.
    pub const fn cavity1() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    pub const fn cavity2() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn from_vector(v: &Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vector(&self) -> Vec3 {
        Vec3::new(self.a1, self.b, self.a2)
    }

    /// `(|a1|², |b|², |a2|²)`.
    pub fn populations(&self) -> [f64; 3] {
        [self.a1.norm_sqr(), self.b.norm_sqr(), self.a2.norm_sqr()]
    }

    pub fn norm(&self) -> f64 {
        self.populations().iter().sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.a1, self.b, self.a2].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::new(self.a1 * factor, self.b * factor, self.a2 * factor)
    }
}

impl Default for ModeState {
    fn default() -> Self {
        Self::cavity1()
    }
}

// Serialized as `[[re, im], [re, im], [re, im]]`.
impl Serialize for ModeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.a1.re, self.a1.im], [self.b.re, self.b.im], [self.a2.re, self.a2.im]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[[f64; 2]; 3]>::deserialize(d)?;
        Ok(Self::new(
            C64::new(raw[0][0], raw[0][1]),
            C64::new(raw[1][0], raw[1][1]),
            C64::new(raw[2][0], raw[2][1]),
        ))
    }
}

/// Eigenvalues with unit-norm eigenvectors, ordered by ascending real part
/// and then ascending imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: [C64; 3],
    pub vectors: [Vec3; 3],
}

impl EigenSystem {
    fn sorted(mut pairs: Vec<(C64, Vec3)>) -> Self {
        pairs.sort_by(|a, b| eigen_order(a.0, b.0));
        Self {
            values: [pairs[0].0, pairs[1].0, pairs[2].0],
            vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
        }
    }

    /// Largest `‖M v − λ v‖` over the three pairs.
    pub fn max_residual(&self, m: &Mat3) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&l, v)| (m * v - v * l).norm())
            .fold(0.0, f64::max)
    }
}

fn eigen_order(a: C64, b: C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Build `N` for the given damping rates and couplings.
pub fn build_dynamic_matrix(params: &SystemParams, g1: f64, g2: f64) -> Result<Mat3> {
    params.validate()?;
    ensure_finite("g1", g1)?;
    ensure_finite("g2", g2)?;
    let zero = C64::new(0.0, 0.0);
    Ok(Mat3::new(
        -I * (params.kappa1 / 2.0), c(g1), zero,
        c(g1), -I * (params.gamma / 2.0), c(g2),
        zero, c(g2), -I * (params.kappa2 / 2.0),
    ))
}

/// `g0 = sqrt(g1² + g2²)`, erroring when both couplings vanish.
pub fn total_coupling(g1: f64, g2: f64) -> Result<f64> {
    ensure_finite("g1", g1)?;
    ensure_finite("g2", g2)?;
    let g0 = g1.hypot(g2);
    if g0 > 0.0 {
        Ok(g0)
    } else {
        Err(Error::DegenerateCouplings)
    }
}

/// The mechanically dark mode `[−g2/g0, 0, g1/g0]`.
pub fn dark_mode(g1: f64, g2: f64) -> Result<Vec3> {
    let g0 = total_coupling(g1, g2)?;
    Ok(Vec3::new(c(-g2 / g0), c(0.0), c(g1 / g0)))
}

/// Eigenvectors of `N` for uniform (or zero) damping, in the labelling
/// `[λ1, λ2, λ3]`: bright `+g0`, bright `−g0`, dark.
///
/// `λ2` carries the sign flip on the mechanical component, which makes it
/// orthogonal to `λ1`.
pub fn labeled_eigenvectors(g1: f64, g2: f64) -> Result<[Vec3; 3]> {
    let g0 = total_coupling(g1, g2)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (u, w) = (g1 / g0, g2 / g0);
    Ok([
        Vec3::new(c(u * s), c(s), c(w * s)),
        Vec3::new(c(u * s), c(-s), c(w * s)),
        Vec3::new(c(-w), c(0.0), c(u)),
    ])
}

/// Closed-form eigensystem of the undamped `N`: eigenvalues `{−g0, 0, g0}`.
pub fn eigensystem_undamped(g1: f64, g2: f64) -> Result<EigenSystem> {
    eigensystem_damped_uniform(&SystemParams::undamped(), g1, g2)
}

/// Closed-form eigensystem for `κ1 = κ2 = γ = κ`: eigenvalues
/// `{±g0 − iκ/2, −iκ/2}` with the damping-independent eigenvectors of
/// [`labeled_eigenvectors`].
pub fn eigensystem_damped_uniform(params: &SystemParams, g1: f64, g2: f64) -> Result<EigenSystem> {
    params.validate()?;
    let kappa = params.uniform_rate().ok_or_else(|| {
        Error::Unsupported(
            "closed-form eigensystem needs kappa1 == kappa2 == gamma; use eigensystem_numeric".into(),
        )
    })?;
    let g0 = total_coupling(g1, g2)?;
    let shift = -I * (kappa / 2.0);
    let [plus, minus, dark] = labeled_eigenvectors(g1, g2)?;
    Ok(EigenSystem::sorted(vec![
        (c(g0) + shift, plus),
        (c(-g0) + shift, minus),
        (shift, dark),
    ]))
}

/// General numerical eigensolve of a complex 3×3 matrix.
///
/// Eigenvalues come from the complex Schur form; eigenvectors are bilinear
/// cross products of rows of `M − λI` (null vectors), falling back to an
/// explicit null-space basis for repeated eigenvalues. Vector phases are fixed
/// so the first non-negligible component is real and positive. Defective
/// matrices (exceptional points) yield parallel vectors for the merged pair.
pub fn eigensystem_numeric(m: &Mat3) -> Result<EigenSystem> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let scale = m.norm();
    if scale == 0.0 {
        let zero = c(0.0);
        let basis = [Vec3::x(), Vec3::y(), Vec3::z()];
        return Ok(EigenSystem { values: [zero; 3], vectors: basis });
    }
    let schur = Schur::try_new(*m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut values = [t[(0, 0)], t[(1, 1)], t[(2, 2)]];
    values.sort_by(|a, b| eigen_order(*a, *b));

    let merge_tol = 1e-10 * scale;
    let mut pairs = Vec::with_capacity(3);
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (values[j] - values[i]).norm() <= merge_tol {
            j += 1;
        }
        let group = &values[i..j];
        let mean = group.iter().sum::<C64>() / c(group.len() as f64);
        let shifted = m - Mat3::identity() * mean;
        let vecs = null_vectors(&shifted, group.len());
        for (k, v) in vecs.into_iter().enumerate() {
            pairs.push((group[k], fix_phase(v)));
        }
        i = j;
    }
    Ok(EigenSystem::sorted(pairs))
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    Vec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

/// `count` unit vectors spanning (part of) the null space of a nearly
/// singular `a`, under the bilinear product `row · v = 0`.
fn null_vectors(a: &Mat3, count: usize) -> Vec<Vec3> {
    let rows: Vec<Vec3> = (0..3).map(|r| a.row(r).transpose()).collect();
    let scale = a.norm();
    let crosses = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])];
    let best = crosses
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()
        .unwrap_or_else(Vec3::zeros);

    let rank_two = best.norm() > 1e-13 * scale * scale;
    if count == 1 && rank_two {
        return vec![best.normalize()];
    }
    if rank_two {
        // Defective: only one independent eigenvector exists.
        return vec![best.normalize(); count];
    }

    let dominant = rows
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()
        .unwrap_or_else(Vec3::zeros);
    let basis = [Vec3::x(), Vec3::y(), Vec3::z()];
    if dominant.norm() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        return basis[..count].to_vec();
    }
    let mut candidates: Vec<Vec3> = basis.iter().map(|e| cross(&dominant, e)).collect();
    candidates.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let first = candidates[0].normalize();
    let mut out = vec![first];
    if count > 1 {
        let second = candidates[1] - first * first.dotc(&candidates[1]);
        out.push(second.normalize());
    }
    if count > 2 {
        let third = candidates[2] - out[0] * out[0].dotc(&candidates[2]) - out[1] * out[1].dotc(&candidates[2]);
        out.push(if third.norm() > 1e-12 { third.normalize() } else { out[1] });
    }
    out
}

/// Rotate `v` so its first non-negligible component is real and positive.
pub fn fix_phase(v: Vec3) -> Vec3 {
    let n = v.norm();
    match v.iter().find(|z| z.norm() > 1e-12 * n) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v,
    }
}

/// Literature parameters for a silicon optomechanical crystal device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalPreset {
    pub params: SystemParams,
    /// Coupling scale `g` (rad/μs).
    pub coupling: f64,
    /// Mechanical resonance frequency `ωm` (rad/μs), metadata only.
    pub omega_m: f64,
    /// Optical resonance frequency `ω0` (rad/μs), metadata only.
    pub omega_cavity: f64,
}

/// Mechanical frequency, 3.68 GHz.
pub const EXPERIMENT_MECHANICAL_MHZ: f64 = 3.68e3;
/// Mechanical damping, 35 kHz.
pub const EXPERIMENT_DAMPING_MHZ: f64 = 0.035;
/// Optomechanical coupling, 910 kHz.
pub const EXPERIMENT_COUPLING_MHZ: f64 = 0.91;
/// Optical frequency, 195 THz.
pub const EXPERIMENT_CAVITY_MHZ: f64 = 1.95e8;

/// Experimental parameters. No cavity linewidth is quoted for this device, so
/// both cavity rates default to the mechanical rate; see
/// [`preset_experimental_with_cavity`] to override.
pub fn preset_experimental() -> ExperimentalPreset {
    let gamma = angular_from_mhz(EXPERIMENT_DAMPING_MHZ);
    preset_experimental_with_cavity(gamma, gamma)
}

pub fn preset_experimental_with_cavity(kappa1: f64, kappa2: f64) -> ExperimentalPreset {
    ExperimentalPreset {
        params: SystemParams { kappa1, kappa2, gamma: angular_from_mhz(EXPERIMENT_DAMPING_MHZ) },
        coupling: angular_from_mhz(EXPERIMENT_COUPLING_MHZ),
        omega_m: angular_from_mhz(EXPERIMENT_MECHANICAL_MHZ),
        omega_cavity: angular_from_mhz(EXPERIMENT_CAVITY_MHZ),
    }
}
