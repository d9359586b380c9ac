use std::path::PathBuf;
use std::process::ExitCode;

use casimir_born_cli::identities::identity_suite;
use casimir_born_cli::{run, with_threads, CliError, RunOptions, EXIT_NUMERICAL, EXIT_OK};
use clap::{Parser, Subcommand};

/// Casimir-Polder and van der Waals potentials from the Born expansion.
#[derive(Debug, Parser)]
#[command(name = "cpborn", version)]
struct Cli {
    /// Directory for CSV plot data.
    #[arg(long, global = true, value_name = "DIR")]
    emit_plot_data: Option<PathBuf>,

    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs the scenario described by a configuration file.
    Run {
        config: PathBuf,
        /// Writes the JSON record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the kernel and limit identities.
    Identities,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let opts = RunOptions {
                seed: cli.seed,
                threads: cli.threads,
                plot_dir: cli.emit_plot_data,
                out,
            };
            let report = run(&config, &opts)?;
            for f in &report.record.flags {
                eprintln!("flag: {f}");
            }
            Ok(report.exit_code)
        }
        Command::Identities => {
            let report = with_threads(cli.threads, identity_suite)??;
            print!("{}", report.table());
            Ok(if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            })
        }
    }
}
