use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use poroshell::config::Overrides;
use poroshell::run::run_file;
use poroshell::Execution;

/// Batch runner for poroelastic flexural shell scenarios.
///
/// Log verbosity is read from POROSHELL_LOG (e.g. `info`, `debug`).
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Compare the final pressure with the spectral series.
        #[arg(long)]
        oracle_check: bool,
        /// Overrides `discretization.dt`.
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        /// Overrides `discretization.t_end`.
        #[arg(long, allow_negative_numbers = true)]
        t_end: Option<f64>,
        /// Disable data parallelism.
        #[arg(long)]
        sequential: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POROSHELL_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            oracle_check,
            dt,
            t_end,
            sequential,
        } => {
            let overrides = Overrides {
                output_dir,
                oracle_check,
                dt,
                t_end,
            };
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            match run_file(&config, &overrides, exec) {
                Ok(summary) => {
                    println!(
                        "completed {} steps ({} flexural dofs, {} nodes); max energy residual {:.3e}",
                        summary.steps, summary.flexural_dofs, summary.nodes, summary.energy.max_abs_residual
                    );
                    if let Some(o) = summary.oracle {
                        println!(
                            "oracle: relative L2 pressure error {:.3e} (J = {})",
                            o.pressure_relative_l2, o.modes
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
