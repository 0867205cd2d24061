//! `swbench`: run the shallow-water benchmark cases from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{FULL_LADDER, LADDER};
use config::{SimArgs, UsageError};

#[derive(Parser)]
#[command(name = "swbench", version, about = "Well-balanced shallow-water scheme benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write snapshot_final.csv and summary.json
    Run {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter over a list of values for one or more schemes
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Parameter to vary, e.g. H_r
        #[arg(long = "sweep", value_name = "PARAM")]
        param: String,
        /// `v1,v2,...` or `start:stop:step`
        #[arg(long)]
        values: String,
        /// Comma-separated scheme ids or `all` (default: --scheme)
        #[arg(long)]
        schemes: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh-refinement study on the smooth channel
    Convergence {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        schemes: Option<String>,
        /// L1 error bound defining "cells needed"
        #[arg(long, default_value_t = 0.008)]
        bound: f64,
        /// Extend the ladder to 12800 cells
        #[arg(long)]
        full_ladder: bool,
        /// Explicit comma-separated ladder
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Optional parameter to vary (dh or dl)
        #[arg(long = "sweep", value_name = "PARAM", requires = "values")]
        param: Option<String>,
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List scheme ids
    ListSchemes,
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run { sim, out } => {
            let s = sim.resolve()?;
            let out = out.unwrap_or_else(|| commands::default_out("run", &s));
            commands::cmd_run(&s, &out)
        }
        Command::Sweep {
            sim,
            param,
            values,
            schemes,
            out,
        } => {
            let s = sim.resolve()?;
            let schemes = commands::resolve_schemes(schemes.as_deref(), &s)?;
            let out = out.unwrap_or_else(|| commands::default_out("sweep", &s));
            commands::cmd_sweep(&s, &param, &values, &schemes, &out).map(|_| ())
        }
        Command::Convergence {
            sim,
            schemes,
            bound,
            full_ladder,
            ladder,
            param,
            values,
            out,
        } => {
            let s = sim.resolve_with(Some(6))?;
            let schemes = commands::resolve_schemes(schemes.as_deref(), &s)?;
            let ladder = ladder.unwrap_or_else(|| if full_ladder { FULL_LADDER.to_vec() } else { LADDER.to_vec() });
            let out = out.unwrap_or_else(|| commands::default_out("convergence", &s));
            let sweep = param.as_deref().zip(values.as_deref());
            commands::cmd_convergence(&s, &schemes, &ladder, bound, sweep, &out)
        }
        Command::ListSchemes => {
            commands::cmd_list_schemes();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("swbench: usage: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("swbench: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
