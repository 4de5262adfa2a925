use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stirap_cli::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "stirap",
    version,
    about = "STIRAP simulations for Λ and Tm:YAG-like level schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Single evolution: trajectory CSV and summary JSON.
    Simulate(Args),
    /// Efficiency scan over one parameter.
    Scan(Args),
    /// Scan averaged over the Raman inhomogeneous distribution.
    EnsembleScan(Args),
    /// Predicted probe-spectrum features.
    Features(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides run.out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core); overrides run.workers.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// section.key=value, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn execute(command: Command, args: Args) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = RunConfig::from_file(&args.config, &args.overrides)?.resolve()?;
    if let Some(out) = args.out {
        cfg.run.out = out;
    }
    if let Some(n) = args.workers {
        cfg.run.workers = n;
    }
    let out = cfg.run.out.clone();
    run(command, &cfg, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Scan(a) => (Command::Scan, a),
        Sub::EnsembleScan(a) => (Command::EnsembleScan, a),
        Sub::Features(a) => (Command::Features, a),
    };
    match execute(command, args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stirap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
