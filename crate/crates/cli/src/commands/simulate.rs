use std::path::Path;

use optomech::integrator::{converge, integrate, max_difference, Generator, ProtocolGenerator, Trajectory, CONVERGENCE_TOL};
use optomech::metrics::{cost_report, transfer_fidelity, CostReport, Mode};
use optomech::model::{build_dynamic_matrix, dark_mode, eigensystem_numeric};
use optomech::exec;
use serde::Serialize;

use crate::commands::cost::{cost_table, CostSummary};
use crate::config::{OutputKind, Protocol, Scenario, ScenarioConfig};
use crate::error::CliResult;
use crate::output::{gnuplot_script, write_atomic, write_json, Csv};

pub const TRAJECTORY_COLUMNS: [&str; 14] = [
    "t", "re_a1", "im_a1", "re_b", "im_b", "re_a2", "im_a2", "p_a1", "p_b", "p_a2", "g1", "g2", "theta",
    "cost_frobenius",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub a1: f64,
    pub b: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<String>,
    pub protocol: Protocol,
    pub final_populations: Populations,
    /// Final `|a2|²`.
    pub fidelity: f64,
    pub max_mechanical_population: f64,
    pub final_norm: f64,
    /// Max amplitude difference against a run at half the step.
    pub convergence_estimate: f64,
    pub converged: bool,
    pub dt: f64,
    pub steps: usize,
    pub span: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSummary>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub trajectory: Trajectory,
    pub summary: Summary,
    pub cost: Option<CostReport>,
}

/// Integrate one scenario; no files touched.
pub fn run(cfg: &ScenarioConfig, interpretation: Option<&str>) -> CliResult<Simulation> {
    let mut scenario = cfg.resolve()?;
    let echo = cfg.echo(&scenario);
    let generator = ProtocolGenerator::new(scenario.params, scenario.schedule.clone(), scenario.counterdiabatic)?;

    let (trajectory, estimate) = if cfg.refine {
        let run = converge(&generator, &scenario.initial, &scenario.integration)?;
        scenario.integration.dt = run.dt;
        scenario.integration.record_every *= 1 << (run.halvings + 1);
        (run.trajectory, run.estimate)
    } else {
        let mut fine_cfg = scenario.integration;
        fine_cfg.dt /= 2.0;
        fine_cfg.record_every *= 2;
        let (coarse, fine) = exec::join(
            || integrate(&generator, &scenario.initial, &scenario.integration),
            || integrate(&generator, &scenario.initial, &fine_cfg),
        );
        let coarse = coarse?;
        let estimate = max_difference(&coarse, &fine?);
        (coarse, estimate)
    };

    let cost = if cfg.wants(OutputKind::Cost) {
        Some(cost_report(&scenario.schedule, &scenario.params, cfg.nodes)?)
    } else {
        None
    };

    let last = trajectory.final_populations().unwrap_or([0.0; 3]);
    let summary = Summary {
        label: cfg.label.clone(),
        interpretation: interpretation.map(str::to_owned),
        protocol: cfg.protocol,
        final_populations: Populations { a1: last[0], b: last[1], a2: last[2] },
        fidelity: transfer_fidelity(&trajectory, Mode::A2)?,
        max_mechanical_population: trajectory.populations.iter().map(|p| p[1]).fold(0.0, f64::max),
        final_norm: trajectory.final_state().map(|s| s.norm()).unwrap_or(0.0),
        convergence_estimate: estimate,
        converged: estimate <= CONVERGENCE_TOL,
        dt: scenario.integration.dt,
        steps: scenario.integration.steps(),
        span: [scenario.integration.t0, scenario.integration.t1],
        cost: cost.as_ref().map(CostSummary::from),
        config: echo,
    };
    Ok(Simulation { scenario, trajectory, summary, cost })
}

pub fn trajectory_csv(sim: &Simulation) -> CliResult<Csv> {
    let generator =
        ProtocolGenerator::new(sim.scenario.params, sim.scenario.schedule.clone(), sim.scenario.counterdiabatic)?;
    let traj = &sim.trajectory;
    let rows: Vec<CliResult<[f64; 14]>> = exec::map_range(traj.len(), |i| {
        let t = traj.times[i];
        let s = &traj.states[i];
        let p = traj.populations[i];
        let g = traj.pulses[i];
        let cost = generator.matrix(t)?.norm();
        Ok([t, s.a1.re, s.a1.im, s.b.re, s.b.im, s.a2.re, s.a2.im, p[0], p[1], p[2], g.g1, g.g2, traj.theta[i], cost])
    });
    let mut csv = Csv::new(&TRAJECTORY_COLUMNS);
    for row in rows {
        csv.row(&row?);
    }
    Ok(csv)
}

/// Instantaneous spectrum of the bare dynamic matrix plus the dark-mode population.
pub fn eigen_csv(sim: &Simulation) -> CliResult<Csv> {
    let traj = &sim.trajectory;
    let floor = sim.scenario.schedule.coupling_floor();
    let params = sim.scenario.params;
    let rows: Vec<CliResult<[f64; 8]>> = exec::map_range(traj.len(), |i| {
        let g = traj.pulses[i];
        let es = eigensystem_numeric(&build_dynamic_matrix(&params, g.g1, g.g2)?)?;
        let a = traj.states[i].to_vector();
        let p_dark = if g.g0() > floor && a.norm() > 0.0 {
            dark_mode(g.g1, g.g2)?.dotc(&a).norm_sqr() / a.norm_squared()
        } else {
            f64::NAN
        };
        let e = es.values;
        Ok([traj.times[i], e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, p_dark])
    });
    let mut csv = Csv::new(&["t", "re_e1", "im_e1", "re_e2", "im_e2", "re_e3", "im_e3", "p_dark"]);
    for row in rows {
        csv.row(&row?);
    }
    Ok(csv)
}

pub fn write(sim: &Simulation, cfg: &ScenarioConfig, dir: &Path) -> CliResult<()> {
    if cfg.wants(OutputKind::Trajectory) {
        write_atomic(&dir.join("trajectory.csv"), trajectory_csv(sim)?.as_str())?;
        if cfg.gnuplot {
            let script = gnuplot_script(
                "trajectory.csv",
                "populations",
                "t (us)",
                "population",
                &[(8, "a1"), (9, "b"), (10, "a2")],
            );
            write_atomic(&dir.join("trajectory.gp"), &script)?;
        }
    }
    if cfg.wants(OutputKind::Eigen) {
        write_atomic(&dir.join("eigen.csv"), eigen_csv(sim)?.as_str())?;
    }
    if let Some(report) = &sim.cost {
        write_atomic(&dir.join("costs.csv"), cost_table(&sim.scenario.schedule, report)?.as_str())?;
    }
    write_json(&dir.join("summary.json"), &sim.summary)
}

/// `simulate`: run and write trajectory.csv, summary.json and the requested extras.
pub fn execute(cfg: &ScenarioConfig, interpretation: Option<&str>, dir: &Path) -> CliResult<Simulation> {
    let sim = run(cfg, interpretation)?;
    write(&sim, cfg, dir)?;
    Ok(sim)
}
