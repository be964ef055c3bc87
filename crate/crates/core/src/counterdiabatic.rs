//! Transitionless (counterdiabatic) correction for the uniformly damped model.
//!
//! Writing `g1 = g0 sinθ`, `g2 = g0 cosθ`, the instantaneous eigenvectors of
//! `N` depend on time only through the mixing angle `θ`, whose rate is
//! `ϑ = (ġ1 g2 − g1 ġ2)/g0²`. The correction `H = i Σm |∂t λm⟩⟨λm|` then couples
//! the two cavities directly; the bright-mode terms cancel, so the mechanical
//! row and column stay empty.
//!
//! Two normalizations are carried:
//!
//! * [`CdConvention::Printed`]: `(1/2)·[[0,0,iϑ],[0,0,0],[−iϑ,0,0]]`, the
//!   commonly quoted form, which [`cd_matrix`] returns;
//! * [`CdConvention::Definition`]: `[[0,0,iϑ],[0,0,0],[−iϑ,0,0]]`, what the
//!   sum over eigenvectors actually evaluates to (see
//!   [`transitionless_correction`]). Only this one keeps the dark mode exactly
//!   on its instantaneous eigenvector.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{build_dynamic_matrix, labeled_eigenvectors, total_coupling, SystemParams};
use crate::pulses::PulseSample;
use crate::{c, Mat3, Vec3, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdConvention {
    /// Half-strength cavity-cavity coupling `±iϑ/2`.
    Printed,
    /// Full-strength coupling `±iϑ`, equal to `i Σ |∂λ⟩⟨λ|`.
    Definition,
}

impl CdConvention {
    pub fn strength(self) -> f64 {
        match self {
            CdConvention::Printed => 0.5,
            CdConvention::Definition => 1.0,
        }
    }
}

/// Mixing-angle rate `ϑ` and the correction matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CdSample {
    pub theta: f64,
    pub matrix: Mat3,
}

/// `ϑ = (ġ1 g2 − g1 ġ2)/(g1² + g2²)`, set to zero when `g0 < floor`.
///
/// The floor regularizes the `0/0` at the edges of pulses that switch off
/// together; use [`Schedule::coupling_floor`](crate::pulses::Schedule::coupling_floor).
pub fn theta(sample: &PulseSample, floor: f64) -> f64 {
    let g0_sq = sample.g1 * sample.g1 + sample.g2 * sample.g2;
    if g0_sq == 0.0 || g0_sq < floor * floor {
        return 0.0;
    }
    (sample.dg1 * sample.g2 - sample.g1 * sample.dg2) / g0_sq
}

/// The half-strength correction `(1/2)·[[0,0,iϑ],[0,0,0],[−iϑ,0,0]]`.
pub fn cd_matrix(theta: f64) -> Mat3 {
    cd_matrix_with(theta, CdConvention::Printed)
}

pub fn cd_matrix_with(theta: f64, convention: CdConvention) -> Mat3 {
    let h = I * (theta * convention.strength());
    let mut m = Mat3::zeros();
    m[(0, 2)] = h;
    m[(2, 0)] = -h;
    m
}

pub fn cd_sample(sample: &PulseSample, floor: f64, convention: CdConvention) -> CdSample {
    let theta = theta(sample, floor);
    CdSample { theta, matrix: cd_matrix_with(theta, convention) }
}

/// `N + H_CD` with the printed correction.
pub fn driven_generator(params: &SystemParams, sample: &PulseSample, floor: f64) -> Result<Mat3> {
    driven_generator_with(params, sample, floor, CdConvention::Printed)
}

pub fn driven_generator_with(
    params: &SystemParams,
    sample: &PulseSample,
    floor: f64,
    convention: CdConvention,
) -> Result<Mat3> {
    let n = build_dynamic_matrix(params, sample.g1, sample.g2)?;
    Ok(n + cd_matrix_with(theta(sample, floor), convention))
}

/// Time derivatives of [`labeled_eigenvectors`], from `ġ1`, `ġ2` via the
/// quotient rule on `g1/g0` and `g2/g0`.
pub fn eigenvector_derivatives(sample: &PulseSample) -> Result<[Vec3; 3]> {
    let PulseSample { g1, g2, dg1, dg2 } = *sample;
    let g0 = total_coupling(g1, g2)?;
    let dg0 = (g1 * dg1 + g2 * dg2) / g0;
    let du = dg1 / g0 - g1 * dg0 / (g0 * g0);
    let dw = dg2 / g0 - g2 * dg0 / (g0 * g0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok([
        Vec3::new(c(du * s), c(0.0), c(dw * s)),
        Vec3::new(c(du * s), c(0.0), c(dw * s)),
        Vec3::new(c(-dw), c(0.0), c(du)),
    ])
}

/// `i Σm |∂t λm⟩⟨λm|` assembled directly from the eigenvectors and their
/// derivatives.
pub fn transitionless_correction(sample: &PulseSample) -> Result<Mat3> {
    let vecs = labeled_eigenvectors(sample.g1, sample.g2)?;
    let dvecs = eigenvector_derivatives(sample)?;
    let sum = vecs
        .iter()
        .zip(&dvecs)
        .fold(Mat3::zeros(), |acc, (v, dv)| acc + dv * v.adjoint());
    Ok(sum * I)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{InvariantSchedule, PulseOrdering, Sin4Schedule};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn theta_cases() {
        let inv = InvariantSchedule::new(0.1, 1.0).unwrap();
        for t in [0.0, 0.4, 1.0] {
            let p = inv.sample(t).unwrap();
            assert_abs_diff_eq!(theta(&p, 0.0), FRAC_PI_2, epsilon = 1e-13);
        }
        // Proportional couplings have a fixed mixing angle.
        let p = PulseSample::new(2.0, 6.0, 0.5, 1.5);
        assert_eq!(theta(&p, 0.0), 0.0);
        let p = PulseSample::new(0.0, 0.0, 3.0, -1.0);
        assert_eq!(theta(&p, 0.0), 0.0);
        let p = PulseSample::new(1e-12, 0.0, 3.0, -1.0);
        assert_eq!(theta(&p, 1e-9), 0.0);
    }

    #[test]
    fn cd_matrix_entries() {
        let m = cd_matrix(2.0);
        let mut want = Mat3::zeros();
        want[(0, 2)] = I;
        want[(2, 0)] = -I;
        assert_eq!(m, want);
        assert_eq!(cd_matrix(0.0), Mat3::zeros());
        assert_eq!(m, m.adjoint());
        for th in [-3.0, 0.7, 11.0] {
            assert_abs_diff_eq!(cd_matrix(th).norm(), f64::abs(th) / SQRT_2, epsilon = 1e-14);
            assert_abs_diff_eq!(
                cd_matrix_with(th, CdConvention::Definition).norm(),
                f64::abs(th) * SQRT_2,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn driven_generator_cases() {
        let p = SystemParams::undamped();
        let s = PulseSample::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(driven_generator(&p, &s, 0.0).unwrap(), build_dynamic_matrix(&p, 1.0, 0.0).unwrap());

        let k = SystemParams::uniform(0.4).unwrap();
        let s = PulseSample::new(1.0, 2.0, -0.5, 0.3);
        let m = driven_generator(&k, &s, 0.0).unwrap();
        for i in 0..3 {
            assert_eq!(m[(i, i)], -I * 0.2);
        }
        assert_eq!(m[(0, 2)], I * (theta(&s, 0.0) / 2.0));
    }

    #[test]
    fn definition_matches_eigenvector_sum() {
        let sched = Sin4Schedule::new(50.0, 0.3, 1.0, PulseOrdering::Counterintuitive).unwrap();
        for t in [0.35, 0.5, 0.8, 0.95] {
            let s = sched.sample(t);
            let direct = transitionless_correction(&s).unwrap();
            let closed = cd_matrix_with(theta(&s, 0.0), CdConvention::Definition);
            assert!((direct - closed).norm() <= 1e-12 * (1.0 + closed.norm()));
            assert!((direct - cd_matrix(theta(&s, 0.0)) * c(2.0)).norm() <= 1e-12 * (1.0 + closed.norm()));
        }
    }
}
