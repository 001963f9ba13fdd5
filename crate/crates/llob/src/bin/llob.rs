//! Experiment runner: `llob <experiment> [--config FILE] [--out DIR]
//! [--seed N] [--jobs N] [--set key=value ...]`.
//!
//! Exit codes: 0 success, 2 config error, 3 solver non-convergence,
//! 4 invariant breach.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use llob::config::ExperimentConfig;
use llob::error::Error;
use llob::experiments::{run, write_result, EXPERIMENTS};

#[derive(Parser, Debug)]
#[command(name = "llob", version, about = "Latent-order-book impact experiments")]
struct Cli {
    /// Experiment name (see --list for the choices).
    experiment: String,

    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for CSV tables and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Generator seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker pool size for sweep experiments (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Inline config overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::UnknownExperiment(_)
        | Error::NonPositiveParameter { .. }
        | Error::InconsistentCurrent { .. }
        | Error::InvalidDistribution(_)
        | Error::ParameterOutOfRange(_)
        | Error::InvalidSchedule(_)
        | Error::Io(_) => 2,
        Error::InvariantBreach(_)
        | Error::PriceEscapedGrid { .. }
        | Error::NoZeroCrossing
        | Error::NonUniqueZeroCrossing
        | Error::InsufficientDepth { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.experiment == "--list" || cli.experiment == "list" {
        for name in EXPERIMENTS {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        match ExperimentConfig::from_file(path) {
            Ok(parsed) => cfg = parsed,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    for assignment in &cli.set {
        let Some((key, value)) = assignment.split_once('=') else {
            eprintln!("error: --set expects key=value, got `{assignment}`");
            return ExitCode::from(2);
        };
        if let Err(e) = cfg.set(key.trim(), value) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let result = match run(&cli.experiment, &cfg) {
        Ok(result) => result,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    match write_result(&result, &cli.out) {
        Ok(files) => {
            for file in files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
