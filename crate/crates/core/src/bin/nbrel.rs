use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{error, info};

use nbrel::dataset::load_split;
use nbrel::experiment::{run_experiment, ExperimentConfig};

/// Log filter, e.g. `NBREL_LOG=debug`.
const LOG_ENV: &str = "NBREL_LOG";

#[derive(Parser)]
#[command(
    name = "nbrel",
    version,
    about = "Naive Bayes prediction reliability benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark and write ARC, point-cloud and summary files.
    Run(RunArgs),
    /// Check the config and every dataset manifest without running.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated dataset names to keep.
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if !args.datasets.is_empty() {
        config.retain_datasets(&args.datasets)?;
    }
    Ok(config)
}

fn run(args: RunArgs) -> Result<bool> {
    let mut config = load_config(&args.common)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    let report = run_experiment(&config)?;
    for f in &report.failures {
        error!("{}: {}", f.name, f.error);
        eprintln!("dataset {} failed: {}", f.name, f.error);
    }
    info!(
        "{} datasets done, {} failed, {} files in {}",
        report.results.len(),
        report.failures.len(),
        report.written.len(),
        config.output_dir.display()
    );
    Ok(report.succeeded())
}

fn validate(args: CommonArgs) -> Result<bool> {
    let config = load_config(&args)?;
    let mut ok = true;
    for m in &config.manifests {
        match load_split(m) {
            Ok(s) => println!(
                "{}: ok ({} train, {} test)",
                m.name,
                s.train.len(),
                s.test.len()
            ),
            Err(e) => {
                ok = false;
                println!("{}: {e}", m.name);
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
