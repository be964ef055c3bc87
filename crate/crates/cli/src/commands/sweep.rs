use std::path::Path;

use optomech::counterdiabatic::CdConvention;
use optomech::metrics::{cost_integral, CostVariant};
use serde::Serialize;

use crate::commands::simulate;
use crate::config::{OutputKind, SweepSpec};
use crate::error::CliResult;
use crate::output::{fmt_f64, write_atomic, write_json, Csv};

pub const SWEEP_COLUMNS: [&str; 13] = [
    "index",
    "value",
    "status",
    "p_a1",
    "p_b",
    "p_a2",
    "fidelity",
    "c_spectral",
    "c_frobenius",
    "c_frobenius_definition",
    "convergence_estimate",
    "converged",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub outcome: Result<PointSummary, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub populations: [f64; 3],
    pub fidelity: f64,
    pub c_spectral: Option<f64>,
    pub c_frobenius: f64,
    pub c_frobenius_definition: f64,
    pub convergence_estimate: f64,
    pub converged: bool,
}

fn run_point(spec: &SweepSpec, index: usize, value: f64, dir: &Path) -> CliResult<PointSummary> {
    let mut cfg = spec.point(value)?;
    // Costs are reported per point whether or not the base asked for them.
    cfg.outputs.retain(|k| *k != OutputKind::Cost);
    let sim = simulate::run(&cfg, None)?;
    simulate::write(&sim, &cfg, &dir.join(format!("point_{index:04}")))?;

    let params = sim.scenario.params;
    let schedule = &sim.scenario.schedule;
    let c_spectral = match params.uniform_rate() {
        Some(_) => Some(cost_integral(schedule, &params, CostVariant::Spectral)?),
        None => None,
    };
    let p = sim.summary.final_populations;
    Ok(PointSummary {
        populations: [p.a1, p.b, p.a2],
        fidelity: sim.summary.fidelity,
        c_spectral,
        c_frobenius: cost_integral(schedule, &params, CostVariant::Frobenius(CdConvention::Printed))?,
        c_frobenius_definition: cost_integral(schedule, &params, CostVariant::Frobenius(CdConvention::Definition))?,
        convergence_estimate: sim.summary.convergence_estimate,
        converged: sim.summary.converged,
    })
}

fn evaluate(spec: &SweepSpec, dir: &Path, jobs: Option<usize>) -> Vec<PointResult> {
    let points: Vec<(usize, f64)> = spec.grid.iter().copied().enumerate().collect();
    let task = |&(index, value): &(usize, f64)| PointResult {
        index,
        value,
        outcome: run_point(spec, index, value, dir).map_err(|e| e.to_string()),
    };
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            builder = builder.num_threads(n);
        }
        match builder.build() {
            Ok(pool) => pool.install(|| optomech::exec::map_parallel(&points, task)),
            Err(_) => optomech::exec::map_sequential(&points, task),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        optomech::exec::map_sequential(&points, task)
    }
}

pub fn summary_csv(spec: &SweepSpec, results: &[PointResult]) -> Csv {
    let mut header: Vec<&str> = SWEEP_COLUMNS.to_vec();
    let label = spec.parameter.label();
    header[1] = &label;
    let mut csv = Csv::new(&header);
    for r in results {
        let mut fields = vec![r.index.to_string(), fmt_f64(r.value)];
        match &r.outcome {
            Ok(s) => {
                fields.push("ok".into());
                fields.extend(s.populations.iter().map(|v| fmt_f64(*v)));
                fields.push(fmt_f64(s.fidelity));
                fields.push(s.c_spectral.map(fmt_f64).unwrap_or_default());
                fields.push(fmt_f64(s.c_frobenius));
                fields.push(fmt_f64(s.c_frobenius_definition));
                fields.push(fmt_f64(s.convergence_estimate));
                fields.push(s.converged.to_string());
                fields.push(String::new());
            }
            Err(msg) => {
                fields.push("failed".into());
                fields.extend(std::iter::repeat_n(String::new(), 8));
                fields.push(format!("\"{}\"", msg.replace('"', "'")));
            }
        }
        csv.raw(&fields);
    }
    csv
}

/// `sweep <spec>`: one directory per grid point plus summary.csv in grid order.
/// Failed points are marked and counted; they do not stop the others.
pub fn execute(spec: &SweepSpec, dir: &Path, jobs: Option<usize>) -> CliResult<Vec<PointResult>> {
    spec.validate()?;
    let results = evaluate(spec, dir, jobs);
    write_atomic(&dir.join("summary.csv"), summary_csv(spec, &results).as_str())?;
    write_json(&dir.join("sweep.json"), spec)?;
    Ok(results)
}
