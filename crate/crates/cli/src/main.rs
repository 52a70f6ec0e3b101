//! `hyrrt`: plan, validate, run Monte Carlo batches, and export plot data.
//!
//! Exit codes: 0 success, 1 planner or validation failure, 2 bad input.

mod commands;
mod config;
mod plan_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hyrrt", version, about = "Motion planning for hybrid systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the planner and write the plan file.
    Plan {
        /// Config file; defaults to $HYRRT_CONFIG.
        config: Option<PathBuf>,
        /// Plan output path, overriding `output.plan`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify a plan file against the configured problem.
    Validate {
        plan: PathBuf,
        /// Config file; defaults to $HYRRT_CONFIG.
        config: Option<PathBuf>,
        /// Also check clearance of this radius.
        #[arg(long)]
        delta: Option<f64>,
        /// Random points per ball in the clearance check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Validate against the system inflated by `--delta`.
        #[arg(long, requires = "delta")]
        inflate: bool,
    },
    /// Run the planner over many seeds and write JSON and CSV reports.
    #[command(group(ArgGroup::new("seed_source").required(true).args(["runs", "seeds"])))]
    Montecarlo {
        /// Config file; defaults to $HYRRT_CONFIG.
        config: Option<PathBuf>,
        /// Number of runs, seeded from `planner.seed` upward.
        #[arg(long)]
        runs: Option<usize>,
        /// File listing seeds.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Iteration budgets to sweep, e.g. `50,200,1000`.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Flatten a plan file to CSV rows `t, j, x_1.., u_1..`.
    PlotData { plan: PathBuf, out: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Plan { config, out } => commands::plan(config, out),
        Command::Validate {
            plan,
            config,
            delta,
            samples,
            inflate,
        } => commands::validate(commands::ValidateArgs {
            plan,
            config,
            delta,
            samples,
            inflate,
        }),
        Command::Montecarlo {
            config,
            runs,
            seeds,
            sweep,
            report,
            csv,
        } => commands::montecarlo(commands::MonteCarloArgs {
            config,
            runs,
            seeds,
            sweep,
            report,
            csv,
        }),
        Command::PlotData { plan, out } => commands::plot_data(&plan, &out),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
