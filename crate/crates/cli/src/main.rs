use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hwsn_core::presets::{preset_by_name, run_preset, MANIFEST_FILE};
use hwsn_core::report::run_scenario;
use hwsn_core::scenario::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "hwsn",
    version,
    about = "Sleep-deprivation IDS simulator for clustered sensor networks"
)]
struct Cli {
    /// Overrides the seed of the config (or of every preset run).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for preset sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its outputs.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a figure preset.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Print the fully defaulted config.
    Defaults,
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config, cli.seed)?;
            let run = run_scenario(&cfg, &out)
                .with_context(|| format!("run of {} failed", config.display()))?;
            let f = run.last_frame();
            println!(
                "{} epochs, alive {}, energy {:.3} J, accuracy {:.3}, quarantined {} -> {}",
                cfg.horizon,
                f.alive_count,
                f.energy_consumed,
                f.accuracy,
                f.quarantined_count,
                out.display()
            );
        }
        Command::Preset { name, out } => {
            let preset = preset_by_name(&name)?;
            let seed = cli.seed.unwrap_or(1);
            let res = run_preset(preset.as_ref(), seed, &out, cli.threads)
                .with_context(|| format!("preset {name} failed"))?;
            print!("{}", res.series.csv());
            println!(
                "{} runs -> {} ({}, {})",
                res.arms.len(),
                out.display(),
                res.series.file,
                MANIFEST_FILE
            );
        }
        Command::Validate { config } => {
            let cfg = load(&config, cli.seed)?;
            println!(
                "{}: ok, {} nodes, {} epochs, {} attackers, seed {}",
                config.display(),
                cfg.field.node_count(),
                cfg.horizon,
                cfg.attackers.len(),
                cfg.seed
            );
        }
        Command::Defaults => {
            let mut cfg = ScenarioConfig::with_seed(cli.seed.unwrap_or(1));
            cfg.hierarchy.sector_radius = Some(cfg.sector_radius());
            print!("{}", cfg.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
