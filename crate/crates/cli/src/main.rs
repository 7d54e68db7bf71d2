//! `wgf`: train, sweep, audit and repair fairness-constrained classifiers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "wgf",
    version,
    about = "Between- and within-group fair classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the split and optimizer seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the reference model and one penalized model.
    Train(ConfigArgs),
    /// Train every (lambda, eta) cell of a grid and select one.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// Cells trained in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Exact metrics of a predictions CSV.
    Audit {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "z")]
        sensitive_col: String,
        #[arg(long, default_value = "y")]
        label_col: String,
        /// Also write the report to this JSON file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Massage the training labels and fit a quantile repair of the reference scores.
    Repair(ConfigArgs),
}

fn load(args: &ConfigArgs) -> anyhow::Result<RunConfig> {
    let cfg = RunConfig::load(&args.config)?;
    Ok(match args.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Train(args) => commands::train(&load(&args)?),
        Command::Sweep { args, jobs } => commands::sweep_grid(&load(&args)?, jobs),
        Command::Audit {
            predictions,
            sensitive_col,
            label_col,
            output,
        } => commands::audit(&predictions, &sensitive_col, &label_col, output.as_deref()),
        Command::Repair(args) => commands::repair(&load(&args)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors exit 1 because 2 reports an infeasible run
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(cli) {
        Ok(Outcome::Feasible) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
