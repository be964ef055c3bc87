use std::path::Path;

use optomech::counterdiabatic::theta;
use optomech::metrics::{cost_report, fig4_curve, CostReport, FIG4_KAPPA_RATIO};
use optomech::pulses::Schedule;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::output::{gnuplot_script, write_atomic, write_json, Csv};
use crate::presets::{fig4_grid, FIG4_THETAS};

pub const COST_COLUMNS: [&str; 7] =
    ["t", "g1", "g2", "theta", "cost_spectral", "cost_frobenius", "cost_frobenius_definition"];

/// Time-averaged costs, as stored in summary files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostSummary {
    pub c_spectral: f64,
    pub c_frobenius: f64,
    pub c_frobenius_definition: f64,
    pub max_discrepancy: f64,
    pub discrepancy_flag: bool,
}

impl From<&CostReport> for CostSummary {
    fn from(r: &CostReport) -> Self {
        Self {
            c_spectral: r.c_spectral,
            c_frobenius: r.c_frobenius,
            c_frobenius_definition: r.c_frobenius_definition,
            max_discrepancy: r.max_discrepancy,
            discrepancy_flag: r.discrepancy_flag,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CostFile<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    interpretation: Option<&'a str>,
    #[serde(flatten)]
    summary: CostSummary,
    nodes: usize,
    config: &'a ScenarioConfig,
}

pub fn cost_table(schedule: &Schedule, report: &CostReport) -> CliResult<Csv> {
    let floor = schedule.coupling_floor();
    let mut csv = Csv::new(&COST_COLUMNS);
    for (i, &t) in report.times.iter().enumerate() {
        let p = schedule.sample(t)?;
        csv.row(&[
            t,
            p.g1,
            p.g2,
            theta(&p, floor),
            report.instantaneous_spectral[i],
            report.instantaneous_frobenius[i],
            report.instantaneous_frobenius_definition[i],
        ]);
    }
    Ok(csv)
}

/// `cost <config>`: costs.csv (per node) and cost.json (integrals + config echo).
pub fn execute(cfg: &ScenarioConfig, interpretation: Option<&str>, dir: &Path) -> CliResult<CostReport> {
    let params = cfg.params()?;
    if params.uniform_rate().is_none() {
        return Err(CliError::config(
            "the spectral cost formula needs kappa1 == kappa2 == gamma",
        ));
    }
    let schedule = cfg.schedule()?;
    let report = cost_report(&schedule, &params, cfg.nodes)?;
    write_atomic(&dir.join("costs.csv"), cost_table(&schedule, &report)?.as_str())?;
    let file = CostFile { interpretation, summary: CostSummary::from(&report), nodes: cfg.nodes, config: cfg };
    write_json(&dir.join("cost.json"), &file)?;
    if cfg.gnuplot {
        let script = gnuplot_script(
            "costs.csv",
            "instantaneous cost",
            "t (us)",
            "cost (rad/us)",
            &[(5, "spectral"), (6, "frobenius"), (7, "frobenius, full correction")],
        );
        write_atomic(&dir.join("costs.gp"), &script)?;
    }
    Ok(report)
}

pub fn fig4_file_name(theta: f64) -> String {
    format!("fig4_theta_{:.1}pi.csv", theta / std::f64::consts::PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Curve {
    pub theta: f64,
    pub g0: Vec<f64>,
    pub values: Vec<f64>,
}

/// The four `∂ₜC/g0` curves.
pub fn fig4_curves() -> CliResult<Vec<Fig4Curve>> {
    let grid = fig4_grid();
    FIG4_THETAS
        .iter()
        .map(|&theta| {
            let values = fig4_curve(&grid, theta, FIG4_KAPPA_RATIO)?;
            Ok(Fig4Curve { theta, g0: grid.clone(), values })
        })
        .collect()
}

/// One CSV per curve plus a gnuplot script.
pub fn execute_fig4(dir: &Path) -> CliResult<Vec<Fig4Curve>> {
    let curves = fig4_curves()?;
    let mut plots = Vec::new();
    for Fig4Curve { theta: th, g0: grid, values } in &curves {
        let mut csv = Csv::new(&["g0", "dtC_over_g0"]);
        for (g, v) in grid.iter().zip(values) {
            csv.row(&[*g, *v]);
        }
        let name = fig4_file_name(*th);
        write_atomic(&dir.join(&name), csv.as_str())?;
        plots.push(format!("'{name}' using 1:2 with lines title 'theta = {:.1} pi'", th / std::f64::consts::PI));
    }
    let script = format!(
        "set datafile separator ','\nset logscale x\nset xlabel 'g0 (rad/us)'\nset ylabel 'd_t C / g0'\nplot {}\n",
        plots.join(", \\\n     ")
    );
    write_atomic(&dir.join("fig4.gp"), &script)?;
    Ok(curves)
}
