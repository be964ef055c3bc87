use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::presets::Preset;

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Cavity-mechanics-cavity state conversion: simulations, costs and sweeps")]
pub struct Cli {
    /// Use a built-in figure scenario instead of a config file.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one scenario; writes trajectory.csv and summary.json.
    Simulate {
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Instantaneous and time-averaged costs; writes costs.csv and cost.json.
    Cost {
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Run a grid of scenarios; writes one directory per point and summary.csv.
    Sweep {
        spec: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
        /// Worker threads (default: number of processors).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the built-in property checks.
    Validate {
        /// List the checks without running them.
        #[arg(long)]
        list: bool,
        /// Override the step of the convergence check.
        #[arg(long, hide = true)]
        debug_dt: Option<f64>,
    },
}
