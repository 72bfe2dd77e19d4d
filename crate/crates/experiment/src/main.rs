use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_experiment::config::load_spec_as;
use ris_experiment::{run_experiment, ExperimentError, ExperimentKind, ExperimentSpec};

/// Simulates RIS-assisted downlinks to UAVs and reproduces the fairness,
/// transmit-power and one-bit studies.
#[derive(Debug, Parser)]
#[command(name = "ris-uav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment spec (TOML). Reference-scenario defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Comma-separated seeds, overriding the spec.
    #[arg(long, global = true, value_delimiter = ',')]
    seed: Option<Vec<u64>>,

    /// Output directory, overriding the spec.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Restrict RIS phases to {0, π}.
    #[arg(long, global = true)]
    one_bit: bool,

    /// Iterations per run, overriding the spec.
    #[arg(long, global = true)]
    iterations: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint DRL under the sum-rate and max-min objectives.
    Fairness,
    /// Best minimum SINR of every algorithm across transmit powers.
    PmaxSweep,
    /// Continuous against one-bit phases.
    OnebitTable,
    /// Check a spec and print it with every default filled in.
    ValidateConfig,
}

fn resolve(cli: &Cli) -> Result<ExperimentSpec, ExperimentError> {
    let force = match cli.command {
        Command::Fairness => Some(ExperimentKind::Fairness),
        Command::PmaxSweep => Some(ExperimentKind::PmaxSweep),
        Command::OnebitTable => Some(ExperimentKind::OnebitTable),
        Command::ValidateConfig => None,
    };
    let mut spec = match &cli.config {
        Some(path) => load_spec_as(path, force)?,
        None => ExperimentSpec::defaults(force.unwrap_or(ExperimentKind::PmaxSweep)),
    };
    if let Some(seeds) = &cli.seed {
        spec.seeds = seeds.clone();
    }
    if let Some(out) = &cli.out {
        spec.output_dir = out.clone();
    }
    if cli.one_bit {
        spec.one_bit = true;
    }
    if let Some(n) = cli.iterations {
        spec.iterations = n;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    let spec = resolve(cli)?;
    if let Command::ValidateConfig = cli.command {
        print!("{}", spec.to_toml());
        return Ok(());
    }
    let mut log = |msg: &str| eprintln!("running {msg}");
    for path in run_experiment(&spec, &mut log)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
