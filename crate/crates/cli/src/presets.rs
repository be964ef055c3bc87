//! Figure-reproduction scenarios. Each carries a banner stating how the
//! under-specified caption parameters were filled in.

use std::f64::consts::PI;

use clap::ValueEnum;
use optomech::counterdiabatic::CdConvention;
use optomech::pulses::PulseOrdering;
use serde::{Deserialize, Serialize};

use crate::config::{InitialState, OutputKind, Protocol, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

/// Mixing rates of the four cost curves.
pub const FIG4_THETAS: [f64; 4] = [0.0, 0.1 * PI, 0.2 * PI, 0.3 * PI];

/// Steps for the sin⁴ presets; keeps `G·dt` small enough for 1e-9 step agreement.
const SIN4_STEPS: f64 = 44_000.0;

fn base(protocol: Protocol) -> ScenarioConfig {
    ScenarioConfig {
        label: None,
        protocol,
        ordering: PulseOrdering::AsPrinted,
        amplitude: None,
        tau: None,
        period: None,
        xi: None,
        kappa1: 0.0,
        kappa2: 0.0,
        gamma: 0.0,
        initial_state: InitialState::default(),
        dt: None,
        record_every: 1,
        outputs: vec![OutputKind::Trajectory],
        schedule_csv: None,
        cd_convention: None,
        refine: false,
        nodes: optomech::metrics::MIN_QUADRATURE_NODES,
        gnuplot: true,
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    pub fn banner(self) -> &'static str {
        match self {
            Preset::Fig1 => {
                "fig1: sin^4 pulses as printed (g1 = G f(t), g2 = G f(t - tau)), G*T = 1e3 read as \
                 dimensionless with T = 1 us, tau = 0.1 T, no damping, start in a1"
            }
            Preset::Fig2 => "fig2: invariant-based pulses, alpha = xi = 0.1, beta = pi t / 2T, T = 1 us, no damping, start in a1",
            Preset::Fig3 => {
                "fig3: spectral-consistent qualitative reproduction; base schedule not stated, fixed to \
                 counterintuitive sin^4 (g2 leads), G*T = 1e3, T = 1 us, tau = 0.1 T, no damping, \
                 full-strength counterdiabatic term, start in the dark mode"
            }
            Preset::Fig4 => "fig4: d_t C / g0 from the spectral cost formula, kappa = 0.01 g0, theta in {0, 0.1pi, 0.2pi, 0.3pi}",
        }
    }

    /// Scenario for the simulation presets; `None` for the cost-only fig4.
    pub fn scenario(self) -> Option<ScenarioConfig> {
        match self {
            Preset::Fig1 => Some(ScenarioConfig {
                label: Some("fig1".into()),
                amplitude: Some(1000.0),
                tau: Some(0.1),
                period: Some(1.0),
                dt: Some(1.1 / SIN4_STEPS),
                outputs: vec![OutputKind::Trajectory, OutputKind::Cost],
                record_every: 10,
                refine: true,
                ..base(Protocol::Sin4)
            }),
            Preset::Fig2 => Some(ScenarioConfig {
                label: Some("fig2".into()),
                xi: Some(0.1),
                period: Some(1.0),
                outputs: vec![OutputKind::Trajectory, OutputKind::Cost],
                ..base(Protocol::Invariant)
            }),
            Preset::Fig3 => Some(ScenarioConfig {
                label: Some("fig3".into()),
                ordering: PulseOrdering::Counterintuitive,
                amplitude: Some(1000.0),
                tau: Some(0.1),
                period: Some(1.0),
                dt: Some(1.1 / SIN4_STEPS),
                record_every: 10,
                initial_state: InitialState::Named(crate::config::NamedState::Dark),
                cd_convention: Some(CdConvention::Definition),
                outputs: vec![OutputKind::Trajectory, OutputKind::Cost, OutputKind::Eigen],
                ..base(Protocol::Sin4Cd)
            }),
            Preset::Fig4 => None,
        }
    }
}

/// Logarithmic `g0` grid for the cost curves, rad/μs.
pub fn fig4_grid() -> Vec<f64> {
    let n = 401;
    (0..n).map(|k| 10f64.powf(-1.0 + 5.0 * k as f64 / (n - 1) as f64)).collect()
}
