use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use active_doi::app::{cmd_check, cmd_run, RunOverrides};
use active_doi::check::{CheckOptions, FaultInjection};

#[derive(Parser)]
#[command(name = "active-doi", version, about = "Inhomogeneous Doi model for active liquid crystals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.out_dir`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Number of steps (overrides `t_final / tau`).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the built-in invariant suites.
    Check {
        /// Only suites whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Scale the mollifier weights to confirm the suites catch it.
        #[arg(long, hide = true)]
        fault_kernel_scale: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config, out_dir, steps } => cmd_run(&config, &RunOverrides { out_dir, steps }),
        Command::Check { filter, fault_kernel_scale } => cmd_check(&CheckOptions {
            filter,
            fault: FaultInjection { kernel_scale: fault_kernel_scale },
        }),
    };
    ExitCode::from(code as u8)
}
