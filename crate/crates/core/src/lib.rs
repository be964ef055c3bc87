//! Fast state conversion between two cavity modes coupled through a
//! mechanical resonator.
//!
//! The linearized three-mode model `i dA/dt = N(t) A`, with `A = [a1, b, a2]`,
//! is driven by one of three coupling protocols:
//!
//! * overlapping `sin^4` pulses (plain adiabatic passage),
//! * couplings reverse-engineered from a Lewis-Riesenfeld invariant,
//! * `sin^4` pulses plus a counterdiabatic cavity-cavity correction.
//!
//! All rates and couplings are in rad/μs and times in μs.

pub mod counterdiabatic;
pub mod error;
pub mod exec;
pub mod integrator;
pub mod invariant;
pub mod metrics;
pub mod model;
pub mod pulses;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Complex 3×3 generator.
pub type Mat3 = nalgebra::Matrix3<C64>;
/// Complex 3-vector in the `[a1, b, a2]` basis.
pub type Vec3 = nalgebra::Vector3<C64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
