//! `qloc`: localization bounds from the command line.
//!
//! ```text
//! qloc [OPTIONS] <COMMAND> [KEY=VALUE]...
//! ```
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 numerical
//! failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qloc::cli::{self, Command, ConfigLayers, Format, RunConfig};
use qloc::Error;

#[derive(Debug, Parser)]
#[command(
    name = "qloc",
    version,
    about = "Precision bounds for localizing optical point emitters"
)]
struct Args {
    /// Computation to run.
    #[arg(value_enum)]
    command: Command,

    /// Command parameters as key=value (override the config file).
    #[arg(value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Config file with `key = value` lines and `#` comments.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format (default: csv for kappa-curve, json otherwise).
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Seed for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,

    /// Sphere quadrature size as N_THETAxN_PHI, e.g. 64x128.
    #[arg(long, value_name = "NTxNP")]
    quad: Option<String>,

    /// Single-threaded reference mode.
    #[arg(long)]
    sequential: bool,
}

fn execute(args: Args) -> Result<(), Error> {
    let file = match &args.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?),
        None => None,
    };
    let layers = ConfigLayers {
        file,
        assignments: args.params,
        seed: args.seed,
        quad: args.quad,
        format: args.format,
        output: args.output,
        sequential: args.sequential,
    };
    let cfg = RunConfig::resolve(args.command, &layers)?;
    let out = cli::run(&cfg)?;
    if let Some(text) = cli::emit(&out)? {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qloc: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
