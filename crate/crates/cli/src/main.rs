//! `zqsim` — experiment runner for the zoned neutral-atom simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zqsim_cli::config::ExperimentConfig;
use zqsim_cli::experiment::{analyze_bundle, decode_bundle, run_experiment, RunError};
use zqsim_cli::tables;

#[derive(Parser)]
#[command(name = "zqsim", version, about = "Zoned neutral-atom QEC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a circuit and its metadata sidecar without simulating.
    Gen {
        /// Experiment config (TOML).
        config: PathBuf,
    },
    /// Run a full experiment: generate, simulate, decode, analyze, report.
    Run {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Worker threads (0 = library default). Results are thread-count
        /// invariant.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Re-decode an existing repcode output bundle.
    Decode {
        /// Output directory of a previous repcode run.
        dir: PathBuf,
    },
    /// Recompute detection frequencies for an existing repcode bundle.
    Analyze {
        dir: PathBuf,
    },
    /// Recompute published benchmark tables from embedded counts and check
    /// the derived values.
    ReproduceTables,
    /// Compute a per-image leakage-loss map over a detuning grid.
    LeakageMap {
        /// Experiment config (TOML) with a `[leakage_map]` section.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            ExitCode::from(code as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    let cwd = std::env::current_dir().map_err(|e| RunError::Other(e.into()))?;
    match cli.command {
        Command::Gen { config } => {
            let cfg = load_config(&config)?;
            // A zero-shot run produces exactly the generation artifacts.
            let mut gen_only = cfg;
            gen_only.shots = 0;
            let summary = run_experiment(&gen_only, &cwd)?;
            println!("wrote {}", summary.out_dir.display());
            Ok(())
        }
        Command::Run { config, threads } => {
            let mut cfg = load_config(&config)?;
            if threads > 0 {
                cfg.threads = threads;
            }
            let summary = run_experiment(&cfg, &cwd)?;
            println!("wrote {}", summary.out_dir.display());
            if let Some(rate) = summary.logical_failure_rate {
                println!("logical failure rate: {rate:.3e}");
            }
            if let Some(attempts) = summary.mean_attempts {
                println!("mean herald attempts: {attempts:.3}");
            }
            if let Some(frac) = summary.fill_fraction_ok {
                println!("fraction of trials above fill target: {frac:.4}");
            }
            Ok(())
        }
        Command::Decode { dir } => {
            let stats = decode_bundle(&dir).map_err(RunError::Other)?;
            println!(
                "failures {} / {} = {:.3e} (Wilson 95% [{:.3e}, {:.3e}])",
                stats.failures, stats.shots, stats.rate, stats.wilson_95.0, stats.wilson_95.1
            );
            Ok(())
        }
        Command::Analyze { dir } => {
            let freqs = analyze_bundle(&dir).map_err(RunError::Other)?;
            println!("cycle,mean,std");
            for f in freqs {
                println!("{},{:.6e},{:.6e}", f.cycle, f.mean, f.std);
            }
            Ok(())
        }
        Command::ReproduceTables => {
            let md = tables::reproduce_tables_strict().map_err(RunError::Other)?;
            println!("{md}");
            Ok(())
        }
        Command::LeakageMap { config } => {
            let cfg = load_config(&config)?;
            let summary = run_experiment(&cfg, &cwd)?;
            println!("wrote {}", summary.out_dir.display());
            Ok(())
        }
    }
}

fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, RunError> {
    ExperimentConfig::from_path(path).map_err(|e| RunError::Config(format!("{e:#}")))
}
