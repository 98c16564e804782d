use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ar1_predict::cli::{parse_config, run};

/// Prediction limits and intervals for Gaussian AR(1) forecasting.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path (overrides "out" in the config)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed (overrides "master_seed" in the config)
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread count (overrides "workers" in the config)
    #[arg(long)]
    workers: Option<usize>,

    /// Allow overwriting an existing output file
    #[arg(long)]
    overwrite: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(args: Args) -> ar1_predict::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = parse_config(&text)?;
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers.max(1);
    }
    run(&config, args.overwrite)
}
