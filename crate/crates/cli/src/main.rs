use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use phytospde::commands::{
    converge_n_command, ensemble_command, picard_command, plot_data, simulate_command,
    verify_estimates_command, CommandOutput,
};
use phytospde::{parse_config, RunConfig};

#[derive(Parser)]
#[command(name = "phytospde", version, about = "Stochastic phytoplankton aggregation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration, or a manifest from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// One trajectory: timeseries and snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Picard iteration on one frozen noise path.
    Picard {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        iterations: usize,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Empirical constants for every estimate, one report each.
    VerifyEstimates {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Radius of the D(B) ball for the drift constants.
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
    },
    /// Pathwise distances between approximations on common noise.
    ConvergeN {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
        n_list: Vec<u32>,
    },
    /// `k` realizations on consecutive stream ids.
    Ensemble {
        k: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Re-emits a snapshot or table as two whitespace-separated columns.
    PlotData {
        input: PathBuf,
        /// Table column to pair with the first one.
        #[arg(long)]
        column: Option<String>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut rc = parse_config(&common.config)?;
    if let Some(seed) = common.seed {
        rc.doc.seed = seed;
        rc.solver.noise.seed = seed;
    }
    Ok(rc)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let output: CommandOutput = match cli.command {
        Command::Simulate { common } => simulate_command(&load(&common)?, &common.out)?,
        Command::Picard {
            common,
            iterations,
            tol,
        } => picard_command(&load(&common)?, &common.out, iterations, tol)?,
        Command::VerifyEstimates {
            common,
            trials,
            radius,
        } => verify_estimates_command(&load(&common)?, &common.out, trials, radius)?,
        Command::ConvergeN { common, n_list } => converge_n_command(&load(&common)?, &common.out, &n_list)?,
        Command::Ensemble { k, common, workers } => ensemble_command(&load(&common)?, &common.out, k, workers)?,
        Command::PlotData { input, column, out } => {
            let text = plot_data(&input, column.as_deref())?;
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| p.display().to_string())?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                        other => other?,
                    }
                }
            }
            return Ok(true);
        }
    };
    for line in &output.summary {
        println!("{line}");
    }
    Ok(output.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
