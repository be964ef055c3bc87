//! Lewis-Riesenfeld invariant of the undamped three-mode model and the
//! inverse-engineering map from auxiliary angles to couplings.
//!
//! The invariant
//!
//! ```text
//!          |    0         cosα sinβ   −i sinα   |
//! I(t) = Ω | cosα sinβ        0       cosα cosβ |
//!          |  i sinα      cosα cosβ      0      |
//! ```
//!
//! is conserved by `i dA/dt = N A` when `α̇ = g1 cosβ − g2 sinβ` and
//! `β̇ = tanα (g2 cosβ + g1 sinβ)`. For that sign convention of the dynamics
//! the defining identity is `∂I/∂t = i[I, N]`; the opposite sign is available
//! as [`CommutatorSign::AsPrinted`] for comparison and does not vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_dynamic_matrix, SystemParams};
use crate::pulses::{PulseSample, Schedule};
use crate::{c, exec, Mat3, Vec3, I};

/// Threshold on `|sin α|` below which `cot α` is treated as singular.
pub const MIN_SIN_ALPHA: f64 = 1e-6;

/// Invariant eigenvalues in units of Ω, ordered as `φ1, φ2, φ3`.
pub const INVARIANT_EIGENVALUES: [f64; 3] = [0.0, -1.0, 1.0];

/// Auxiliary angles and their first time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AuxiliaryAngles {
    pub alpha: f64,
    pub beta: f64,
    pub dalpha: f64,
    pub dbeta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMatrix {
    pub omega: f64,
    pub matrix: Mat3,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Omega must be positive and finite, got {omega}")))
    }
}

pub fn invariant_matrix(angles: &AuxiliaryAngles, omega: f64) -> Result<InvariantMatrix> {
    check_omega(omega)?;
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let zero = c(0.0);
    let m = Mat3::new(
        zero, c(ca * sb), -I * sa,
        c(ca * sb), zero, c(ca * cb),
        I * sa, c(ca * cb), zero,
    );
    Ok(InvariantMatrix { omega, matrix: m * c(omega) })
}

/// `∂I/∂t` from the analytic angle derivatives.
pub fn invariant_time_derivative(angles: &AuxiliaryAngles, omega: f64) -> Result<Mat3> {
    check_omega(omega)?;
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let zero = c(0.0);
    let d_alpha = Mat3::new(
        zero, c(-sa * sb), -I * ca,
        c(-sa * sb), zero, c(-sa * cb),
        I * ca, c(-sa * cb), zero,
    );
    let d_beta = Mat3::new(
        zero, c(ca * cb), zero,
        c(ca * cb), zero, c(-ca * sb),
        zero, c(-ca * sb), zero,
    );
    Ok((d_alpha * c(angles.dalpha) + d_beta * c(angles.dbeta)) * c(omega))
}

/// Eigenvectors `[φ1, φ2, φ3]` of the invariant, with eigenvalues
/// `Ω·(0, −1, +1)`.
pub fn invariant_eigenstates(angles: &AuxiliaryAngles) -> [Vec3; 3] {
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        Vec3::new(c(ca * cb), -I * sa, c(-ca * sb)),
        Vec3::new(c(sa * cb) - I * sb, I * ca, c(-sa * sb) - I * cb) * c(s),
        Vec3::new(c(sa * cb) + I * sb, I * ca, c(-sa * sb) + I * cb) * c(s),
    ]
}

/// `(α̇, β̇)` implied by the couplings.
///
/// `β̇` involves `tan α`; at `cos α = 0` it is singular unless the bracket
/// `g2 cosβ + g1 sinβ` vanishes, in which case `β̇ = 0` is returned.
pub fn aux_derivatives(alpha: f64, beta: f64, g1: f64, g2: f64) -> Result<(f64, f64)> {
    let (sb, cb) = beta.sin_cos();
    let dalpha = g1 * cb - g2 * sb;
    let bracket = g2 * cb + g1 * sb;
    let (sa, ca) = alpha.sin_cos();
    if ca.abs() < 1e-15 {
        if bracket == 0.0 {
            return Ok((dalpha, 0.0));
        }
        return Err(Error::SingularAngle { t: None, alpha });
    }
    Ok((dalpha, sa / ca * bracket))
}

/// A prescribed trajectory of auxiliary angles.
pub trait AngleTrajectory: Sync {
    /// Angles and first derivatives at `t`.
    fn angles(&self, t: f64) -> AuxiliaryAngles;
    /// `(α̈, β̈)` at `t`.
    fn second_derivatives(&self, t: f64) -> (f64, f64);
}

/// `α = ξ`, `β = πt/(2T)`: the angles behind
/// [`InvariantSchedule`](crate::pulses::InvariantSchedule).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMixingAngles {
    pub xi: f64,
    pub period: f64,
}

impl AngleTrajectory for LinearMixingAngles {
    fn angles(&self, t: f64) -> AuxiliaryAngles {
        let rate = std::f64::consts::FRAC_PI_2 / self.period;
        AuxiliaryAngles { alpha: self.xi, beta: rate * t, dalpha: 0.0, dbeta: rate }
    }

    fn second_derivatives(&self, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Couplings realizing the prescribed angles at time `t`:
/// `g1 = β̇ cotα sinβ + α̇ cosβ`, `g2 = β̇ cotα cosβ − α̇ sinβ`, with time
/// derivatives from the chain rule.
pub fn inverse_engineer(angles: &dyn AngleTrajectory, t: f64) -> Result<PulseSample> {
    let AuxiliaryAngles { alpha, beta, dalpha, dbeta } = angles.angles(t);
    let (ddalpha, ddbeta) = angles.second_derivatives(t);
    let (sa, ca) = alpha.sin_cos();
    if sa.abs() < MIN_SIN_ALPHA {
        return Err(Error::SingularAngle { t: Some(t), alpha });
    }
    let cot = ca / sa;
    let dcot = -dalpha / (sa * sa);
    let (sb, cb) = beta.sin_cos();

    let g1 = dbeta * cot * sb + dalpha * cb;
    let g2 = dbeta * cot * cb - dalpha * sb;
    let dg1 = ddbeta * cot * sb + dbeta * dcot * sb + dbeta * dbeta * cot * cb + ddalpha * cb
        - dalpha * dbeta * sb;
    let dg2 = ddbeta * cot * cb + dbeta * dcot * cb - dbeta * dbeta * cot * sb - ddalpha * sb
        - dalpha * dbeta * cb;
    let sample = PulseSample::new(g1, g2, dg1, dg2);
    if !sample.is_finite() {
        return Err(Error::SingularAngle { t: Some(t), alpha });
    }
    Ok(sample)
}

/// [`inverse_engineer`] over a grid of times.
pub fn inverse_engineer_grid(angles: &dyn AngleTrajectory, grid: &[f64]) -> Result<Vec<PulseSample>> {
    exec::map(grid, |&t| inverse_engineer(angles, t)).into_iter().collect()
}

/// Sign of the commutator in the invariant identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommutatorSign {
    /// `∂I/∂t = i[I, N]`, the identity implied by `i dA/dt = N A`.
    #[default]
    Consistent,
    /// `∂I/∂t = −i[I, N]`.
    AsPrinted,
}

/// Largest Frobenius-norm residual of the invariant identity over `grid`,
/// using the undamped generator built from `schedule`.
pub fn invariant_residual(
    schedule: &Schedule,
    angles: &dyn AngleTrajectory,
    omega: f64,
    grid: &[f64],
) -> Result<f64> {
    invariant_residual_with(schedule, angles, omega, grid, CommutatorSign::Consistent)
}

pub fn invariant_residual_with(
    schedule: &Schedule,
    angles: &dyn AngleTrajectory,
    omega: f64,
    grid: &[f64],
    sign: CommutatorSign,
) -> Result<f64> {
    check_omega(omega)?;
    let undamped = SystemParams::undamped();
    let sign = match sign {
        CommutatorSign::Consistent => -1.0,
        CommutatorSign::AsPrinted => 1.0,
    };
    let residuals = exec::map(grid, |&t| -> Result<f64> {
        let p = schedule.sample(t)?;
        let n = build_dynamic_matrix(&undamped, p.g1, p.g2)?;
        let a = angles.angles(t);
        let inv = invariant_matrix(&a, omega)?.matrix;
        let didt = invariant_time_derivative(&a, omega)?;
        let comm = inv * n - n * inv;
        Ok((didt + comm * (I * sign)).norm())
    });
    residuals.into_iter().try_fold(0.0_f64, |acc, r| r.map(|r| acc.max(r)))
}
