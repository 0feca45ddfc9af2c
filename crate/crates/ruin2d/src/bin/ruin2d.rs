//! Config-driven experiment runner. All logic lives in the library; this
//! binary only parses arguments, dispatches, and maps errors to exit codes
//! (0 success, 2 validation failure, 3 non-convergence, 4 budget failure,
//! 1 other).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ruin2d::config::ExperimentConfig;
use ruin2d::runner::{
    describe_config, run_asymptotics, run_simulate, run_solve, Overrides, RunError, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(
    name = "ruin2d",
    about = "Two-dimensional compound-Poisson risk model with interest: \
             simulation, Monte Carlo estimation, IDE solving and heavy-tail asymptotics",
    after_help = format!("Output directory precedence: --out, then ${OUT_DIR_ENV}, then the config's output.dir, then ./out.")
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the TOML experiment config.
    #[arg(long, global = true, default_value = "experiment.toml")]
    config: PathBuf,
    /// Override every section seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count (0 = all cores); results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, overriding the environment and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Proceed past hypothesis gates (e.g. asymptotics with claims that are
    /// not regularly varying).
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-horizon ruin probabilities by Monte Carlo; optional path dumps.
    Simulate,
    /// Solve the ruin-time Laplace transform field on the wedge grid.
    Solve,
    /// Heavy-tail approximation ratio sweep against Monte Carlo.
    Asymptotics,
    /// Parse and validate the config, printing a summary.
    ValidateConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, hash) = match ExperimentConfig::load(&cli.config) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
        force: cli.force,
    };
    let result = match cli.command {
        Command::Simulate => run_simulate(&config, &hash, &overrides),
        Command::Solve => run_solve(&config, &hash, &overrides),
        Command::Asymptotics => run_asymptotics(&config, &hash, &overrides),
        Command::ValidateConfig => {
            print!("{}", describe_config(&config, &hash));
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(files) => {
            for file in files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(run_error_code(&e))
        }
    }
}

fn run_error_code(e: &RunError) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(1)
}
