use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use wide_lab::{execute, ExperimentConfig, LabError, RawConfig};

/// Runs a WIDE experiment described by a config file.
#[derive(Parser, Debug)]
#[command(name = "wide", version)]
struct Args {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `mode`.
    #[arg(long, value_parser = ["run", "sweep", "pde", "check", "oracle"])]
    mode: Option<String>,
    /// Overrides the config's `output` directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<ExperimentConfig, LabError> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|source| LabError::Io { path: args.config.clone(), source })?;
    let mut raw = RawConfig::parse(&text)?;
    if let Some(m) = &args.mode {
        raw.set("mode", m)?;
    }
    if let Some(s) = args.seed {
        raw.set("seed", &s.to_string())?;
    }
    if let Some(o) = &args.out {
        raw.set("output", &o.to_string_lossy())?;
    }
    ExperimentConfig::from_raw(&raw)
}

fn run(args: &Args) -> Result<(), LabError> {
    let config = load(args)?;
    let outcome = execute(&config)?;
    outcome.artifacts.write(&config.output)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wide: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
