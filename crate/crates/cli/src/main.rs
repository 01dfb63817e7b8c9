use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qgem_cli::commands::{run, Command, RunError};
use qgem_cli::config::parse_config;
use qgem_core::ExperimentConfig;

/// Feasibility and sweep calculations for a plate-screened gravitational
/// entanglement experiment.
#[derive(Debug, Parser)]
#[command(name = "qgem", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` config; flagship design when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Suppress the summary.
    #[arg(long, global = true)]
    quiet: bool,
}

fn execute(cli: &Cli) -> Result<bool, RunError> {
    let cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::flagship(),
    };
    let outcome = run(cli.command, &cfg, &cli.out)?;
    if !cli.quiet {
        print!("{}", outcome.summary);
        println!("{:<28} {}", "outputs", outcome.manifest.outputs.join(", "));
        println!("{:<28} {}", "config sha256", outcome.manifest.config_sha256);
    }
    Ok(outcome.feasible)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if !cli.quiet {
                println!("design infeasible");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
