//! `ct` command-line tool.
//!
//! Usage: `ct <command> --config <file> [--out <path>] [--format csv|json|svg]
//! [--jobs N] [--seed N]`. Exit codes: 0 success, 2 invalid configuration,
//! 3 numerical failure; errors are reported as JSON on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ct_core::cli::{run, Command, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "ct",
    about = "Critical-threshold analysis for 1D pressureless Euler-Poisson dynamics"
)]
struct Args {
    /// classify | sweep | simulate | thresholds | resonance | characteristics | coldion
    #[arg(value_parser = parse_command)]
    command: Command,

    /// JSON run manifest; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv | json | svg
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,

    /// Worker threads for sweeps and batch runs (0 = rayon default).
    #[arg(long)]
    jobs: Option<usize>,

    /// RNG seed recorded in every output header.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: ct_core::CtError| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: ct_core::CtError| e.to_string())
}

fn load_config(args: &Args) -> ct_core::Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::new(args.command),
    };
    if config.command != args.command {
        return Err(ct_core::CtError::Config(format!(
            "config file is for '{:?}', invoked as '{:?}'",
            config.command, args.command
        )));
    }
    if args.out.is_some() {
        config.out = args.out.clone();
    }
    if args.format.is_some() {
        config.format = args.format;
    }
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load_config(&args) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(jobs) = config.jobs {
        if jobs > 0 {
            // Ignore failure: the global pool may already exist.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &ct_core::CtError) -> ExitCode {
    let payload = serde_json::json!({
        "error": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{payload}");
    ExitCode::from(e.exit_code() as u8)
}
