//! Coupling schedules `(g1(t), g2(t))` with analytic time derivatives.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Relative floor below which `g0` counts as zero (see [`Schedule::coupling_floor`]).
pub const COUPLING_FLOOR_RTOL: f64 = 1e-9;

/// Couplings and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseSample {
    pub g1: f64,
    pub g2: f64,
    pub dg1: f64,
    pub dg2: f64,
}

impl PulseSample {
    pub fn new(g1: f64, g2: f64, dg1: f64, dg2: f64) -> Self {
        Self { g1, g2, dg1, dg2 }
    }

    pub fn g0(&self) -> f64 {
        self.g1.hypot(self.g2)
    }

    pub fn is_finite(&self) -> bool {
        [self.g1, self.g2, self.dg1, self.dg2].iter().all(|v| v.is_finite())
    }
}

/// Which coupling a positive offset `tau` delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseOrdering {
    /// `g1 = G f(t)`, `g2 = G f(t − τ)`: g1 leads for τ > 0.
    #[default]
    AsPrinted,
    /// `g2 = G f(t)`, `g1 = G f(t − τ)`: g2 leads, the ordering that carries
    /// the dark mode from `a1` to `a2`.
    Counterintuitive,
}

/// `sin⁴(πt/T)` on `0 < t < T`, zero elsewhere.
pub fn sin4_envelope(t: f64, period: f64) -> Result<f64> {
    check_period(period)?;
    Ok(envelope(t, period))
}

/// Time derivative of [`sin4_envelope`]; continuous, zero at both edges.
pub fn sin4_envelope_derivative(t: f64, period: f64) -> Result<f64> {
    check_period(period)?;
    Ok(envelope_derivative(t, period))
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("period must be positive and finite, got {period}")))
    }
}

fn envelope(t: f64, period: f64) -> f64 {
    if t > 0.0 && t < period {
        (PI * t / period).sin().powi(4)
    } else {
        0.0
    }
}

fn envelope_derivative(t: f64, period: f64) -> f64 {
    if t > 0.0 && t < period {
        let (s, c) = (PI * t / period).sin_cos();
        4.0 * (PI / period) * s.powi(3) * c
    } else {
        0.0
    }
}

/// Two `sin⁴` pulses of amplitude `G` and period `T`, offset by `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sin4Schedule {
    pub amplitude: f64,
    pub tau: f64,
    pub period: f64,
    pub ordering: PulseOrdering,
}

impl Sin4Schedule {
    pub fn new(amplitude: f64, tau: f64, period: f64, ordering: PulseOrdering) -> Result<Self> {
        let s = Self { amplitude, tau, period, ordering };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_period(self.period)?;
        ensure_finite("tau", self.tau)?;
        ensure_finite("amplitude", self.amplitude)?;
        if self.amplitude < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Union of both pulse supports.
    pub fn span(&self) -> (f64, f64) {
        (self.tau.min(0.0), self.period.max(self.period + self.tau))
    }

    pub fn sample(&self, t: f64) -> PulseSample {
        let g = self.amplitude;
        let lead = (g * envelope(t, self.period), g * envelope_derivative(t, self.period));
        let lag = (
            g * envelope(t - self.tau, self.period),
            g * envelope_derivative(t - self.tau, self.period),
        );
        match self.ordering {
            PulseOrdering::AsPrinted => PulseSample::new(lead.0, lag.0, lead.1, lag.1),
            PulseOrdering::Counterintuitive => PulseSample::new(lag.0, lead.0, lag.1, lead.1),
        }
    }
}

/// Couplings obtained from the invariant with `α = ξ` and `β = πt/(2T)`:
/// `g1 = (π/2T) cot ξ sin(πt/2T)`, `g2 = (π/2T) cot ξ cos(πt/2T)`.
///
/// `g2(0) ≠ 0`, so the couplings switch on abruptly and the initial `a1`
/// state overlaps the invariant's zero mode only to `cos ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSchedule {
    pub xi: f64,
    pub period: f64,
}

impl InvariantSchedule {
    pub fn new(xi: f64, period: f64) -> Result<Self> {
        let s = Self { xi, period };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_period(self.period)?;
        if !(self.xi > 0.0 && self.xi < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("xi must lie in (0, π/2), got {}", self.xi)));
        }
        Ok(())
    }

    /// Constant total coupling `g0 = (π/2T) cot ξ`.
    pub fn total_coupling(&self) -> f64 {
        FRAC_PI_2 / self.period / self.xi.tan()
    }

    /// Mixing rate `β̇ = π/(2T)`.
    pub fn beta_rate(&self) -> f64 {
        FRAC_PI_2 / self.period
    }

    pub fn span(&self) -> (f64, f64) {
        (0.0, self.period)
    }

    pub fn sample(&self, t: f64) -> Result<PulseSample> {
        if !(0.0..=self.period).contains(&t) {
            return Err(Error::OutOfRange { t, start: 0.0, end: self.period });
        }
        let a = self.total_coupling();
        let w = self.beta_rate();
        let (s, c) = (w * t).sin_cos();
        Ok(PulseSample::new(a * s, a * c, a * w * c, -a * w * s))
    }
}

/// Natural cubic spline through `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NaturalSpline {
    y: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalSpline {
    fn fit(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives (Thomas algorithm).
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..m {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Self { y: y.to_vec(), second }
    }

    /// Value and first derivative on segment `i` at `t`.
    fn eval(&self, x: &[f64], i: usize, t: f64) -> (f64, f64) {
        let h = x[i + 1] - x[i];
        let b = (t - x[i]) / h;
        let a = 1.0 - b;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (value, slope)
    }
}

/// User-tabulated couplings, interpolated with natural cubic splines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSchedule {
    times: Vec<f64>,
    g1: NaturalSpline,
    g2: NaturalSpline,
}

impl TabulatedSchedule {
    pub fn new(times: Vec<f64>, g1: Vec<f64>, g2: Vec<f64>) -> Result<Self> {
        if times.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "tabulated schedule needs at least 4 points, got {}",
                times.len()
            )));
        }
        if g1.len() != times.len() || g2.len() != times.len() {
            return Err(Error::InvalidArgument("column lengths differ".into()));
        }
        for (name, col) in [("t", &times), ("g1", &g1), ("g2", &g2)] {
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite {name} value {v}")));
            }
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "time grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let s1 = NaturalSpline::fit(&times, &g1);
        let s2 = NaturalSpline::fit(&times, &g2);
        Ok(Self { times, g1: s1, g2: s2 })
    }

    /// Parse CSV with header `t,g1,g2`.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            _ => return Err(Error::InvalidArgument("empty schedule CSV".into())),
        };
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t", "g1", "g2"] {
            return Err(Error::InvalidArgument(format!("expected header 't,g1,g2', got '{header}'")));
        }
        let (mut t, mut g1, mut g2) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines {
            let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::InvalidArgument(format!("line {}: expected 3 fields", n + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("line {}: '{s}': {e}", n + 1)))
            };
            t.push(parse(fields[0])?);
            g1.push(parse(fields[1])?);
            g2.push(parse(fields[2])?);
        }
        Self::new(t, g1, g2)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn max_amplitude(&self) -> f64 {
        self.g1.y.iter().chain(&self.g2.y).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sample(&self, t: f64) -> Result<PulseSample> {
        let (start, end) = self.span();
        if !(start..=end).contains(&t) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i - 1,
        };
        let (g1, dg1) = self.g1.eval(&self.times, i, t);
        let (g2, dg2) = self.g2.eval(&self.times, i, t);
        Ok(PulseSample::new(g1, g2, dg1, dg2))
    }
}

/// Any supported coupling schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Sin4(Sin4Schedule),
    Invariant(InvariantSchedule),
    Tabulated(TabulatedSchedule),
}

impl Schedule {
    pub fn sample(&self, t: f64) -> Result<PulseSample> {
        ensure_finite("t", t)?;
        match self {
            Schedule::Sin4(s) => Ok(s.sample(t)),
            Schedule::Invariant(s) => s.sample(t),
            Schedule::Tabulated(s) => s.sample(t),
        }
    }

    /// Time interval on which the schedule is defined (or nonzero).
    pub fn span(&self) -> (f64, f64) {
        match self {
            Schedule::Sin4(s) => s.span(),
            Schedule::Invariant(s) => s.span(),
            Schedule::Tabulated(s) => s.span(),
        }
    }

    pub fn duration(&self) -> f64 {
        let (a, b) = self.span();
        b - a
    }

    /// Largest coupling the schedule reaches.
    pub fn amplitude_scale(&self) -> f64 {
        match self {
            Schedule::Sin4(s) => s.amplitude,
            Schedule::Invariant(s) => s.total_coupling(),
            Schedule::Tabulated(s) => s.max_amplitude(),
        }
    }

    /// `ε_g`: below this total coupling the eigenbasis is treated as undefined.
    pub fn coupling_floor(&self) -> f64 {
        COUPLING_FLOOR_RTOL * self.amplitude_scale()
    }
}

impl From<Sin4Schedule> for Schedule {
    fn from(s: Sin4Schedule) -> Self {
        Schedule::Sin4(s)
    }
}

impl From<InvariantSchedule> for Schedule {
    fn from(s: InvariantSchedule) -> Self {
        Schedule::Invariant(s)
    }
}

impl From<TabulatedSchedule> for Schedule {
    fn from(s: TabulatedSchedule) -> Self {
        Schedule::Tabulated(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn envelope_values() {
        assert_abs_diff_eq!(sin4_envelope(0.5, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(sin4_envelope(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(sin4_envelope(2.0, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(sin4_envelope(0.5, 2.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(sin4_envelope(-0.3, 1.0).unwrap(), 0.0);
        assert_eq!(sin4_envelope_derivative(0.0, 1.0).unwrap(), 0.0);
        assert!(sin4_envelope(0.1, 0.0).is_err());
        assert!(sin4_envelope(0.1, -1.0).is_err());
        assert!(sin4_envelope_derivative(0.1, f64::NAN).is_err());
    }

    #[test]
    fn sin4_sample_orderings() {
        let s = Sin4Schedule::new(1000.0, 0.1, 1.0, PulseOrdering::AsPrinted).unwrap();
        let p = s.sample(0.5);
        assert_abs_diff_eq!(p.g1, 1000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.g2, 1000.0 * (0.4 * PI).sin().powi(4), epsilon = 1e-12);

        let ci = Sin4Schedule { ordering: PulseOrdering::Counterintuitive, ..s };
        let q = ci.sample(0.5);
        assert_eq!((q.g1, q.g2, q.dg1, q.dg2), (p.g2, p.g1, p.dg2, p.dg1));

        for sched in [s, ci] {
            assert_eq!(sched.sample(-0.01), PulseSample::default());
        }
        let zero_offset = Sin4Schedule::new(3.0, 0.0, 2.0, PulseOrdering::AsPrinted).unwrap();
        for t in [0.1, 0.7, 1.3, 1.9] {
            let p = zero_offset.sample(t);
            assert_eq!(p.g1, p.g2);
        }
        assert_eq!(s.span(), (0.0, 1.1));
        let neg = Sin4Schedule::new(1.0, -0.2, 1.0, PulseOrdering::AsPrinted).unwrap();
        assert_eq!(neg.span(), (-0.2, 1.0));
        assert!(Sin4Schedule::new(-1.0, 0.0, 1.0, PulseOrdering::AsPrinted).is_err());
    }

    #[test]
    fn invariant_sample_values() {
        let s = InvariantSchedule::new(0.1, 1.0).unwrap();
        // (π/2)·cot(0.1) from 30-digit arithmetic.
        let a = 15.655_568_450_526_452;
        let p = s.sample(0.0).unwrap();
        assert_eq!(p.g1, 0.0);
        assert_abs_diff_eq!(p.g2, a, epsilon = 1e-10);
        assert_abs_diff_eq!(s.sample(1.0).unwrap().g2, 0.0, epsilon = 1e-12);
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_abs_diff_eq!(s.sample(t).unwrap().g0(), a, epsilon = 1e-10);
        }
        assert!(matches!(s.sample(1.01), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.sample(-1e-9), Err(Error::OutOfRange { .. })));
        assert!(InvariantSchedule::new(0.0, 1.0).is_err());
        assert!(InvariantSchedule::new(FRAC_PI_2, 1.0).is_err());
    }

    #[test]
    fn schedule_dispatch() {
        let s4 = Sin4Schedule::new(10.0, 0.2, 1.0, PulseOrdering::Counterintuitive).unwrap();
        let inv = InvariantSchedule::new(0.2, 2.0).unwrap();
        let close = |a: PulseSample, b: PulseSample| {
            [(a.g1, b.g1), (a.g2, b.g2), (a.dg1, b.dg1), (a.dg2, b.dg2)]
                .iter()
                .all(|(x, y)| (x - y).abs() <= 1e-14 * x.abs().max(1.0))
        };
        assert!(close(Schedule::from(s4).sample(0.4).unwrap(), s4.sample(0.4)));
        assert!(close(Schedule::from(inv).sample(0.4).unwrap(), inv.sample(0.4).unwrap()));
        assert!(Schedule::from(s4).sample(f64::NAN).is_err());
    }

    #[test]
    fn tabulated_reproduces_nodes() {
        let t: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
        let g1: Vec<f64> = t.iter().map(|x| x * x).collect();
        let g2: Vec<f64> = t.iter().map(|x| (2.0 * x).sin()).collect();
        let tab = TabulatedSchedule::new(t.clone(), g1.clone(), g2.clone()).unwrap();
        for i in 0..t.len() {
            let p = tab.sample(t[i]).unwrap();
            assert_eq!(p.g1, g1[i]);
            assert_eq!(p.g2, g2[i]);
        }
        assert!(tab.sample(2.0).is_err());
        assert_eq!(tab.span(), (0.0, 1.75));
    }

    #[test]
    fn natural_spline_exact_on_lines() {
        let t = vec![0.0, 0.3, 1.0, 1.2, 2.0];
        let g1: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        let g2: Vec<f64> = t.iter().map(|x| -0.5 * x).collect();
        let tab = TabulatedSchedule::new(t, g1, g2).unwrap();
        for x in [0.05, 0.6, 1.1, 1.7] {
            let p = tab.sample(x).unwrap();
            assert_abs_diff_eq!(p.g1, 2.0 * x + 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p.dg1, 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p.dg2, -0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(TabulatedSchedule::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(TabulatedSchedule::new(vec![0.0, 1.0, 1.0, 2.0], vec![0.0; 4], vec![0.0; 4]).is_err());
        assert!(TabulatedSchedule::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 3], vec![0.0; 4]).is_err());
    }

    #[test]
    fn csv_parsing() {
        let csv = "t,g1,g2\n0,0,1\n0.5,0.5,0.8\n1.0,0.9,0.4\n1.5,1.0,0.0\n";
        let tab = TabulatedSchedule::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(tab.times(), &[0.0, 0.5, 1.0, 1.5]);
        assert!(TabulatedSchedule::from_csv("time,a,b\n".as_bytes()).is_err());
        assert!(TabulatedSchedule::from_csv("t,g1,g2\n0,1\n".as_bytes()).is_err());
        assert!(TabulatedSchedule::from_csv("t,g1,g2\n0,x,1\n".as_bytes()).is_err());
    }
}
