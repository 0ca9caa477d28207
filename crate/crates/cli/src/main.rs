use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use hems_cli::config::RunConfig;
use hems_cli::rank::{load_run_dir, rank_strategies};
use hems_cli::runner::{load_cohort_from, run_experiment};
use hems_core::data::write_cohort_csv;

/// Simulation and benchmarking toolkit for PV-battery home energy
/// management strategies.
#[derive(Parser)]
#[command(name = "hems", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigOverrides {
    /// Run configuration file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated strategy list (scm,toua,scm_toua,milp,dp,pfas,pfag).
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// Forecast mode(s): perfect, persistence, or both comma-separated.
    #[arg(long, value_delimiter = ',')]
    forecast: Option<Vec<String>>,
    /// Replay battery model: linear or nonlinear.
    #[arg(long)]
    battery_model: Option<String>,
    /// Master seed for forecasts and policy training.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment sweep and persist results.
    Simulate(ConfigOverrides),
    /// Rank strategies of a finished run (speed, savings, aging).
    Rank {
        /// Run directory produced by `simulate`.
        #[arg(long)]
        run: PathBuf,
        /// Also write rank.csv into the run directory.
        #[arg(long)]
        write: bool,
    },
    /// Print per-cell economics of a finished run.
    Economics {
        #[arg(long)]
        run: PathBuf,
    },
    /// Print per-cell degradation results of a finished run.
    Degrade {
        #[arg(long)]
        run: PathBuf,
    },
    /// Generate a synthetic cohort CSV.
    Synth {
        #[arg(long, default_value_t = 10)]
        customers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long, default_value = "cohort.csv")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn apply_overrides(cfg: &mut RunConfig, o: &ConfigOverrides) {
    if let Some(s) = &o.strategies {
        cfg.run.strategies = s.clone();
    }
    if let Some(m) = &o.forecast {
        cfg.run.forecast_modes = m.clone();
    }
    if let Some(b) = &o.battery_model {
        cfg.run.battery_model = b.clone();
    }
    if let Some(seed) = o.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &o.out {
        cfg.run.out = out.clone();
    }
    if let Some(w) = o.workers {
        cfg.run.workers = w;
    }
}

fn print_aggregate_subset(run: &PathBuf, columns: &[usize], header: &str) -> Result<()> {
    let text = std::fs::read_to_string(run.join("aggregate.csv"))
        .with_context(|| format!("reading {}/aggregate.csv", run.display()))?;
    println!("{header}");
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let row: Vec<&str> = columns.iter().map(|&i| f.get(i).copied().unwrap_or("")).collect();
        println!("{}", row.join("  "));
    }
    Ok(())
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(overrides) => {
            let mut cfg = load_config(&overrides.config)?;
            apply_overrides(&mut cfg, &overrides);
            let out = run_experiment(&cfg)?;
            let failed = out.cells.iter().filter(|c| c.record.error.is_some()).count();
            println!(
                "simulate: {} cells -> {} ({} failed)",
                out.cells.len(),
                out.out_dir.display(),
                failed
            );
            for cell in out.cells.iter().filter(|c| c.record.error.is_some()) {
                eprintln!(
                    "  FAILED {}/{}/{}: {}",
                    cell.record.customer,
                    cell.record.strategy,
                    cell.record.mode,
                    cell.record.error.as_deref().unwrap_or("")
                );
            }
            Ok(if out.any_failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Rank { run, write } => {
            let cells = load_run_dir(&run)?;
            let table = rank_strategies(&cells)?;
            print!("{}", table.render());
            if write {
                std::fs::write(run.join("rank.csv"), table.to_csv())?;
                println!("wrote {}", run.join("rank.csv").display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Economics { run } => {
            print_aggregate_subset(
                &run,
                &[0, 1, 2, 3, 5, 7, 8, 9, 10],
                "customer  strategy  mode  annual_cost  savings  levelized  irr  irr_inflated  irr_levelized",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Degrade { run } => {
            print_aggregate_subset(
                &run,
                &[0, 1, 2, 11, 12, 13, 14],
                "customer  strategy  mode  soh_20y  fec_per_year  mean_doc  lifetime_years",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { customers, seed, out, config } => {
            let mut cfg = load_config(&config)?;
            cfg.cohort.source = "synth".into();
            cfg.cohort.customers = customers;
            cfg.cohort.seed = seed;
            let cohort = load_cohort_from(&cfg)?;
            write_cohort_csv(&out, &cohort).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!("synth: wrote {} customers to {}", cohort.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
