use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use obs_bandits::config::ExperimentConfig;
use obs_bandits::experiment::run_experiment;
use obs_bandits::oracle::{oracle_seq, oracle_sim};

#[derive(Parser)]
#[command(
    name = "obs-bandits",
    about = "Bandit experiments with costly observation selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, cost, seed) combination and write CSV results.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv / timings.csv / curves.csv.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Print the exact oracle values for each cost point of a config.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            config.resolve_model()?;
            let results = run_experiment(&config, &out)?;
            for warning in &results.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "wrote {} run summaries to {}",
                results.summaries.len(),
                out.join("results.csv").display()
            );
            if config.output.curves {
                println!("wrote curves to {}", out.join("curves.csv").display());
            }
        }
        Command::Oracle { config } => {
            let config = ExperimentConfig::load(&config)?;
            let model = config.resolve_model()?;
            for (label, costs) in config.cost_points(&model) {
                let point = model.with_costs(costs)?;
                let sim = oracle_sim(&point, config.m, config.beta);
                let seq = oracle_seq(&point, config.m, config.beta);
                println!(
                    "cost={label}: sim value={} set={} | seq value={}",
                    sim.value,
                    sim.policy.obs_set(),
                    seq.value
                );
            }
        }
        Command::Validate { config } => {
            let parsed = ExperimentConfig::load(&config)?;
            parsed.resolve_model()?;
            println!("ok: {}", config.display());
        }
    }
    Ok(())
}
