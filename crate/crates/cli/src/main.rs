//! `cogbeam`: secondary-link beamformers under interference-temperature
//! constraints.
//!
//! Subcommands: `solve` (one realization, JSON result), `sweep`
//! (figure-reproduction curves, CSV), `validate` (invariant suites).
//! The `COGBEAM_SEED` environment variable overrides any configured seed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cogbeam_cli::suites::{run_suite, Suite};
use cogbeam_cli::sweep::{records_to_csv, run_sweep, SweepAxis};
use cogbeam_core::config::{ConfigDocument, ResolvedConfig};

#[derive(Parser)]
#[command(name = "cogbeam", version, about = "MIMO spectrum-sharing beamformer optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one sampled network instance and write the result document.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured seed (COGBEAM_SEED overrides both).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep an interference axis over all three scenarios and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 200)]
        realizations: usize,
        /// Paper-scale averaging (50000 realizations per cell).
        #[arg(long, default_value_t = false)]
        full: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a validation suite; nonzero exit on any failed check.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Optional machine-readable report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf, seed_flag: Option<u64>) -> anyhow::Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let mut doc = ConfigDocument::from_json(&text)?;
    if let Some(seed) = seed_flag {
        doc.seed = Some(seed);
    }
    if let Some(env_seed) = env_seed()? {
        doc.seed = Some(env_seed);
    }
    Ok(doc.resolve()?)
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var("COGBEAM_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|_| anyhow::anyhow!("COGBEAM_SEED must be an unsigned integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let run = cogbeam_cli::solve::run_solve(&cfg)?;
            std::fs::write(&out, run.document.to_json())?;
            println!(
                "{} objective {:.6} (upper bound {:.6}, ratio {:.6}) -> {}",
                run.document.provenance_label(),
                run.document.objective,
                run.document.upper_bound,
                run.document.ratio,
                out.display()
            );
            Ok(run.exit_code as u8)
        }
        Command::Sweep { config, axis, from, to, steps, realizations, full, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let records = run_sweep(&cfg, axis, from, to, steps, realizations, full)?;
            std::fs::write(&out, records_to_csv(&records))?;
            println!("wrote {} rows to {}", records.len(), out.display());
            Ok(0)
        }
        Command::Validate { suite, seed, out } => {
            let report = run_suite(suite, seed)?;
            print!("{}", report.render());
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
