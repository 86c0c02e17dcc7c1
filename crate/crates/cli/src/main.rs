mod commands;
mod config;
mod export;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Epsilon, Mode};

#[derive(Parser, Debug)]
#[command(name = "odeco", version, about = "Integrable frame fields and seamless parametrizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Job configuration (JSON). `compare` accepts several.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,
    /// Mesh file (.msh or .json), overriding the config.
    #[arg(long, global = true)]
    mesh: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Odeco penalty length, or `auto` for the longest mesh edge.
    #[arg(long, global = true)]
    epsilon: Option<Epsilon>,
    /// Worker threads for energy assembly.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a frame field and write it with a per-stage report.
    Solve,
    /// Integrate a solved field into a seamless parametrization.
    Parametrize {
        /// Field artifact written by `solve` (default: <out>/field.json).
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Parametrize the smooth and the integrable field of each config and
    /// compare their integration errors.
    Compare,
    /// Run the built-in numerical checks.
    Verify,
    /// Write SVG and VTK files for existing artifacts.
    Export {
        #[arg(long)]
        field: Option<PathBuf>,
        /// Parametrization artifact (default: <out>/param.json when present).
        #[arg(long)]
        param: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Solve => commands::solve(&cli.common),
        Command::Parametrize { field } => commands::parametrize(&cli.common, field),
        Command::Compare => commands::compare(&cli.common),
        Command::Verify => commands::verify(&cli.common),
        Command::Export { field, param } => commands::export(&cli.common, field, param),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
