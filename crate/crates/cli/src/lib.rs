//! Command-line front end for the optomechanical state-conversion simulator.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

use std::path::Path;

pub use error::{CliError, CliResult};

use args::{Cli, Command};
use commands::validate::ValidateOptions;
use config::ScenarioConfig;
use presets::Preset;

fn scenario_source(preset: Option<Preset>, config: Option<&Path>) -> CliResult<(ScenarioConfig, Option<&'static str>)> {
    match (preset, config) {
        (Some(_), Some(_)) => Err(CliError::config("give either a config file or --preset, not both")),
        (Some(p), None) => {
            let cfg = p
                .scenario()
                .ok_or_else(|| CliError::config(format!("preset {} has no simulation scenario", p.name())))?;
            Ok((cfg, Some(p.banner())))
        }
        (None, Some(path)) => Ok((ScenarioConfig::load(path)?, None)),
        (None, None) => Err(CliError::config("missing config file (or --preset)")),
    }
}

fn announce(banner: Option<&str>) {
    if let Some(b) = banner {
        println!("preset {b}");
    }
}


/// Execute a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, output } => {
            let (cfg, banner) = scenario_source(cli.preset, config.as_deref())?;
            announce(banner);
            let sim = commands::simulate::execute(&cfg, banner, &output)?;
            let s = &sim.summary;
            println!(
                "final populations a1 = {:.6}, b = {:.6}, a2 = {:.6}; convergence estimate {:.2e}",
                s.final_populations.a1, s.final_populations.b, s.final_populations.a2, s.convergence_estimate
            );
            println!("wrote {}", output.display());
        }
        Command::Cost { config, output } => {
            if cli.preset == Some(Preset::Fig4) && config.is_none() {
                announce(Some(Preset::Fig4.banner()));
                commands::cost::execute_fig4(&output)?;
            } else {
                let (cfg, banner) = scenario_source(cli.preset, config.as_deref())?;
                announce(banner);
                let r = commands::cost::execute(&cfg, banner, &output)?;
                println!(
                    "C spectral = {:.9e}, C frobenius = {:.9e}, C frobenius (full correction) = {:.9e}",
                    r.c_spectral, r.c_frobenius, r.c_frobenius_definition
                );
                if r.discrepancy_flag {
                    println!("note: spectral and Frobenius costs differ (max {:.3e})", r.max_discrepancy);
                }
            }
            println!("wrote {}", output.display());
        }
        Command::Sweep { spec, output, jobs } => {
            if cli.preset.is_some() {
                return Err(CliError::config("--preset does not apply to sweep"));
            }
            if jobs == Some(0) {
                return Err(CliError::config("--jobs must be positive"));
            }
            let spec = config::SweepSpec::load(&spec)?;
            let results = commands::sweep::execute(&spec, &output, jobs)?;
            let failed = results.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} sweep point(s) failed", results.len());
            }
            println!("wrote {}", output.join("summary.csv").display());
        }
        Command::Validate { list, debug_dt } => {
            if list {
                print!("{}", commands::validate::list());
            } else {
                commands::validate::execute(&ValidateOptions { debug_dt })?;
            }
        }
    }
    Ok(())
}
