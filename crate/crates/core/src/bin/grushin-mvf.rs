use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grushin_mvf::config::Suite;
use grushin_mvf::run::{run_from_path, RunOptions, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "grushin-mvf", version, about = "Mean-value formulas on hypersurfaces in Grushin space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Suite to run; repeatable. Overrides the config's `suites`.
        #[arg(long = "suite", value_enum)]
        suites: Vec<Suite>,
        /// Output directory. Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, suites, out } => {
            ExitCode::from(run_from_path(&config, &RunOptions { suites, out }) as u8)
        }
    }
}
