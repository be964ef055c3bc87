//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use optomech::{Mat3, Vec3};

/// Coefficients of `det(λI − M) = λ³ + c2 λ² + c1 λ + c0`.
pub fn char_poly(m: &Mat3) -> [C64; 3] {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
    [-det, minors, -tr]
}

/// Roots of the monic cubic by Durand–Kerner iteration.
pub fn cubic_roots(coeffs: [C64; 3]) -> [C64; 3] {
    let [c0, c1, c2] = coeffs;
    let p = |z: C64| ((z + c2) * z + c1) * z + c0;
    let radius = 1.0 + c0.norm().max(c1.norm()).max(c2.norm());
    let seed = C64::new(0.4, 0.9);
    let mut z = [seed * radius, seed * seed * radius, seed * seed * seed * radius];
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..3 {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-16 * radius {
            break;
        }
    }
    z
}

pub fn eigenvalues_oracle(m: &Mat3) -> [C64; 3] {
    let mut z = cubic_roots(char_poly(m));
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// Max distance between two eigenvalue multisets, by best matching.
pub fn multiset_distance(a: &[C64; 3], b: &[C64; 3]) -> f64 {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Central difference `(f(t+h) − f(t−h)) / 2h`.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

pub fn central_difference_vec(f: impl Fn(f64) -> Vec3, t: f64, h: f64) -> Vec3 {
    (f(t + h) - f(t - h)) / C64::new(2.0 * h, 0.0)
}

/// Component of unit-normalized `a` orthogonal to unit `v`.
pub fn direction_error(a: &Vec3, v: &Vec3) -> f64 {
    let a = a / C64::new(a.norm(), 0.0);
    (a - v * v.dotc(&a)).norm()
}
