//! Command-line front end: single missions, mode/seed comparisons and
//! resolved-config dumps.
//!
//! Exit codes: 0 on success, 1 for config or usage errors, 2 for runtime
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volsem::runner::{compare_runs, run_mission, ExperimentConfig, ModeSpec};
use volsem::Error;

#[derive(Parser)]
#[command(name = "volsem", version, about = "Volumetric-semantic mapping and exploration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mission and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every mode for every seed and write a comparison table.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated: baseline, geometric, semantic, semantic-uniform,
        /// semantic-vessel, semantic-bias:<class>.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the config with all defaults resolved, plus its scenario.
    DumpScenario {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut exp = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                exp.config.seed = s;
            }
            let out = out.unwrap_or_else(|| exp.config.out_dir.clone());
            let summary = run_mission(exp, &out)?;
            println!(
                "{} steps, avg gain {:.4} nats/step, avg occupied {:.1}, surface {:.1}%{} -> {}",
                summary.averages.steps,
                summary.averages.avg_info_gain,
                summary.averages.avg_occupied,
                100.0 * summary.surface_completeness,
                if summary.exploration_complete { " (complete)" } else { "" },
                out.display()
            );
        }
        Command::Compare { config, modes, seeds, out } => {
            let exp = ExperimentConfig::load(&config)?;
            let modes = modes.iter().map(|m| m.parse()).collect::<Result<Vec<ModeSpec>, _>>()?;
            let out = out.unwrap_or_else(|| exp.config.out_dir.clone());
            let rows = compare_runs(&exp, &modes, &seeds, &out)?;
            for r in rows {
                println!(
                    "{:<24} gain {:>9.4}  occupied {:>8.1}  surface {:>5.1}%",
                    r.mode,
                    r.avg_info_gain,
                    r.avg_occupied,
                    100.0 * r.surface_completeness
                );
            }
            println!("-> {}", out.join("comparison.csv").display());
        }
        Command::DumpScenario { config } => {
            let exp = ExperimentConfig::load(&config)?;
            println!("{}", exp.to_pretty_json()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
