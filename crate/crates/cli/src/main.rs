use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use eemrio::pipeline::{self, Failure};
use eemrio::{Config, OutputSet};

#[derive(Parser)]
#[command(name = "eemrio", version, about = "Multiregional economic and emissions impacts of offshore wind projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of sectors in the top-sector tables; overrides `top_k`.
    #[arg(long, global = true)]
    top_k: Option<usize>,

    /// Only log errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,

    /// Log debug detail.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check every input invariant and report findings without computing.
    Validate,
    /// Derive the direct requirements matrix from supply and use tables.
    DeriveA,
    /// Regionalize emissions and compute emissions factors.
    Satellite,
    /// Estimate project costs.
    Cost,
    /// Economic and emissions impacts per project.
    Impact,
    /// Economic, carbon and social-cost-adjusted payback periods.
    Payback,
    /// Full pipeline with summary tables.
    Run,
    /// Fit cost parameters to reported project totals.
    Calibrate {
        /// `project,state,capacity_mw,turbine_rating_mw,n_turbines,depth_m,distance_to_landfall_km,mean_windspeed_ms,total_musd`;
        /// defaults to the shipped table.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Starting parameters; defaults to the built-in reference values.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Input(anyhow!("--config is required for this subcommand")))?;
    Config::load(path).map_err(Failure::Input)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let (files, out_dir) = match &cli.command {
        Command::Calibrate { targets, base } => {
            let (files, report) = pipeline::stage_calibrate(targets.as_deref(), base.as_deref())?;
            print!("{report}");
            (files, cli.out.clone().unwrap_or_else(|| PathBuf::from(".")))
        }
        Command::Validate => {
            let cfg = load_config(cli)?;
            let findings = pipeline::validate_inputs(&cfg);
            for f in &findings {
                println!("{f}");
            }
            if findings.is_empty() {
                println!("no findings");
                return Ok(());
            }
            return Err(Failure::Input(anyhow!("{} finding(s)", findings.len())));
        }
        cmd => {
            let cfg = load_config(cli)?;
            let top_k = cli.top_k.unwrap_or(cfg.top_k);
            let files: OutputSet = match cmd {
                Command::DeriveA => pipeline::stage_derive_a(&cfg)?,
                Command::Satellite => pipeline::stage_satellite(&cfg)?,
                Command::Cost => pipeline::stage_cost(&cfg)?,
                Command::Impact => pipeline::stage_impact(&cfg, top_k)?,
                Command::Payback => pipeline::stage_payback(&cfg, top_k)?,
                Command::Run => pipeline::stage_run(&cfg, top_k)?,
                Command::Validate | Command::Calibrate { .. } => unreachable!(),
            };
            (files, cli.out.clone().unwrap_or(cfg.output_dir))
        }
    };
    files.write_all(&out_dir).map_err(Failure::Runtime)?;
    for p in files.paths() {
        println!("{}", out_dir.join(p).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else if cli.verbose {
        log::LevelFilter::Debug
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
