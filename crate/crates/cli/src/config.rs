//! Scenario and sweep files (JSON, unknown keys rejected).
//!
//! See `docs/config.md` for the schema.

use std::fs;
use std::path::{Path, PathBuf};

use optomech::counterdiabatic::CdConvention;
use optomech::integrator::{IntegrationConfig, DEFAULT_STEPS};
use optomech::model::{dark_mode, ModeState, SystemParams};
use optomech::pulses::{InvariantSchedule, PulseOrdering, Schedule, Sin4Schedule, TabulatedSchedule};
use optomech::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Sin4,
    Sin4Cd,
    Invariant,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Trajectory,
    Cost,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedState {
    A1,
    B,
    A2,
    /// Dark mode at the first time the total coupling exceeds the floor.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    /// `[[re, im], [re, im], [re, im]]` for `[a1, b, a2]`.
    Amplitudes([[f64; 2]; 3]),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Amplitudes([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    }
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Trajectory]
}

fn default_record_every() -> usize {
    1
}

fn default_nodes() -> usize {
    optomech::metrics::MIN_QUADRATURE_NODES
}

fn default_true() -> bool {
    true
}

fn is_default_state(s: &InitialState) -> bool {
    *s == InitialState::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub protocol: Protocol,
    #[serde(default)]
    pub ordering: PulseOrdering,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default)]
    pub kappa1: f64,
    #[serde(default)]
    pub kappa2: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "is_default_state")]
    pub initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cd_convention: Option<CdConvention>,
    /// Halve `dt` until successive runs agree instead of only estimating the error.
    #[serde(default)]
    pub refine: bool,
    /// Evenly spaced nodes for the instantaneous cost table.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_true")]
    pub gnuplot: bool,
}

/// Everything needed to run one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub schedule: Schedule,
    pub params: SystemParams,
    pub counterdiabatic: Option<CdConvention>,
    pub initial: ModeState,
    pub integration: IntegrationConfig,
}

fn require(value: Option<f64>, field: &str, protocol: &str) -> CliResult<f64> {
    value.ok_or_else(|| CliError::config(format!("field `{field}` is required for protocol {protocol}")))
}

fn field_err(field: &str) -> impl Fn(optomech::Error) -> CliError + '_ {
    move |e| CliError::config(format!("field `{field}`: {e}"))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Reads a config file; a relative `schedule_csv` is resolved against the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let Some(csv) = cfg.schedule_csv.as_mut() {
            if csv.is_relative() {
                *csv = path.parent().unwrap_or(Path::new(".")).join(&*csv);
            }
        }
        Ok(cfg)
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    pub fn params(&self) -> CliResult<SystemParams> {
        SystemParams::new(self.kappa1, self.kappa2, self.gamma).map_err(field_err("kappa1/kappa2/gamma"))
    }

    pub fn schedule(&self) -> CliResult<Schedule> {
        let name = match self.protocol {
            Protocol::Sin4 => "sin4",
            Protocol::Sin4Cd => "sin4-cd",
            Protocol::Invariant => "invariant",
            Protocol::Tabulated => "tabulated",
        };
        Ok(match self.protocol {
            Protocol::Sin4 | Protocol::Sin4Cd => {
                let g = require(self.amplitude, "G", name)?;
                let tau = require(self.tau, "tau", name)?;
                let period = require(self.period, "T", name)?;
                Sin4Schedule::new(g, tau, period, self.ordering).map_err(field_err("G/tau/T"))?.into()
            }
            Protocol::Invariant => {
                let xi = require(self.xi, "xi", name)?;
                let period = require(self.period, "T", name)?;
                InvariantSchedule::new(xi, period).map_err(field_err("xi/T"))?.into()
            }
            Protocol::Tabulated => {
                let path = self
                    .schedule_csv
                    .as_ref()
                    .ok_or_else(|| CliError::config("field `schedule_csv` is required for protocol tabulated"))?;
                let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
                TabulatedSchedule::from_csv(std::io::BufReader::new(file)).map_err(field_err("schedule_csv"))?.into()
            }
        })
    }

    /// Correction applied during integration, if any.
    pub fn counterdiabatic(&self) -> Option<CdConvention> {
        match self.protocol {
            Protocol::Sin4Cd => Some(self.cd_convention.unwrap_or(CdConvention::Definition)),
            _ => None,
        }
    }

    pub fn resolve(&self) -> CliResult<Scenario> {
        let params = self.params()?;
        let schedule = self.schedule()?;
        if self.nodes < 2 {
            return Err(CliError::config("field `nodes` must be at least 2"));
        }
        let span = schedule.span();
        let dt = self.dt.unwrap_or((span.1 - span.0) / DEFAULT_STEPS as f64);
        let integration =
            IntegrationConfig::new(span.0, span.1, dt, self.record_every).map_err(field_err("dt/record_every"))?;
        let initial = initial_state(&self.initial_state, &schedule)?;
        Ok(Scenario { schedule, params, counterdiabatic: self.counterdiabatic(), initial, integration })
    }

    /// Copy with `dt` filled in, so the echo replays the same run.
    pub fn echo(&self, scenario: &Scenario) -> Self {
        Self { dt: Some(scenario.integration.dt), ..self.clone() }
    }
}

/// First time on a fine grid where `g0` exceeds the schedule's floor.
pub fn first_coupled_time(schedule: &Schedule) -> CliResult<f64> {
    let (a, b) = schedule.span();
    let floor = schedule.coupling_floor();
    let n = 100 * DEFAULT_STEPS;
    for k in 0..=n {
        let t = a + (b - a) * k as f64 / n as f64;
        if schedule.sample(t)?.g0() > floor {
            return Ok(t);
        }
    }
    Err(CliError::config("initial_state `dark`: the couplings never switch on"))
}

fn initial_state(spec: &InitialState, schedule: &Schedule) -> CliResult<ModeState> {
    let state = match spec {
        InitialState::Named(NamedState::A1) => ModeState::cavity1(),
        InitialState::Named(NamedState::A2) => ModeState::cavity2(),
        InitialState::Named(NamedState::B) => {
            ModeState::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        }
        InitialState::Named(NamedState::Dark) => {
            let p = schedule.sample(first_coupled_time(schedule)?)?;
            ModeState::from_vector(&dark_mode(p.g1, p.g2)?)
        }
        InitialState::Amplitudes(a) => ModeState::new(
            C64::new(a[0][0], a[0][1]),
            C64::new(a[1][0], a[1][1]),
            C64::new(a[2][0], a[2][1]),
        ),
    };
    if !state.is_finite() {
        return Err(CliError::config("field `initial_state`: amplitudes must be finite"));
    }
    Ok(state)
}

/// Sweep keys: a single field name or several set to the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParameterPath {
    One(String),
    Many(Vec<String>),
}

impl ParameterPath {
    pub fn keys(&self) -> Vec<&str> {
        match self {
            ParameterPath::One(k) => vec![k.as_str()],
            ParameterPath::Many(ks) => ks.iter().map(String::as_str).collect(),
        }
    }

    pub fn label(&self) -> String {
        self.keys().join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: ParameterPath,
    pub grid: Vec<f64>,
    pub base: ScenarioConfig,
}

const SWEEPABLE: &[&str] = &["G", "tau", "T", "xi", "kappa1", "kappa2", "gamma", "dt"];

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut spec: Self = serde_json::from_str(&text).map_err(|e| {
            CliError::config(format!("{}: {e}", path.display()))
        })?;
        if let Some(csv) = spec.base.schedule_csv.as_mut() {
            if csv.is_relative() {
                *csv = path.parent().unwrap_or(Path::new(".")).join(&*csv);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.grid.is_empty() {
            return Err(CliError::config("field `grid` must not be empty"));
        }
        if let Some(v) = self.grid.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config(format!("field `grid`: non-finite value {v}")));
        }
        for key in self.parameter.keys() {
            if !SWEEPABLE.contains(&key) {
                return Err(CliError::config(format!(
                    "field `parameter`: `{key}` is not sweepable (expected one of {})",
                    SWEEPABLE.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Base config with the swept keys set to `value`.
    pub fn point(&self, value: f64) -> CliResult<ScenarioConfig> {
        let mut cfg = self.base.clone();
        for key in self.parameter.keys() {
            let slot = match key {
                "G" => &mut cfg.amplitude,
                "tau" => &mut cfg.tau,
                "T" => &mut cfg.period,
                "xi" => &mut cfg.xi,
                "dt" => &mut cfg.dt,
                "kappa1" => {
                    cfg.kappa1 = value;
                    continue;
                }
                "kappa2" => {
                    cfg.kappa2 = value;
                    continue;
                }
                "gamma" => {
                    cfg.gamma = value;
                    continue;
                }
                other => return Err(CliError::config(format!("field `parameter`: unknown key `{other}`"))),
            };
            *slot = Some(value);
        }
        Ok(cfg)
    }
}
