//! `eit`: simulate and fit EIT resonances in a buffered vapor cell.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eit_cli::commands;
use eit_cli::manifest::{write_run, Manifest, RunClock, RunRecord};
use eit_cli::{CliError, RunConfig, SeriesModel, SynthKind};

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    Exchange,
    ExchangeScaled,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Scan,
    Series,
}

#[derive(Subcommand)]
enum Command {
    /// Signal absorption and transmission against two-photon detuning.
    SimulateScan,
    /// Resonance FWHM at each configured pump power.
    SweepPower,
    /// FWHM-vs-power slope at each configured temperature.
    SweepTemperature,
    /// Lorentzian fit to a scan file.
    FitScan { input: PathBuf },
    /// Linewidth-vs-power fit with the dephasing and/or exchange model.
    FitSeries {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        model: ModelArg,
    },
    /// Simulated scan or series with seeded Gaussian noise.
    Synth {
        #[arg(long, value_enum, default_value = "scan")]
        kind: KindArg,
        /// Noise level in percent.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", p.display())),
                other => other,
            })
        }
    }
}

fn read_input(path: &Path) -> Result<(String, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((path.display().to_string(), bytes))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let clock = RunClock::start();
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut inputs = Vec::new();
    let mut options = Vec::new();
    let (name, outputs) = match &cli.command {
        Command::SimulateScan => ("simulate-scan", commands::simulate_scan(&cfg)?),
        Command::SweepPower => ("sweep-power", commands::sweep_power(&cfg)?),
        Command::SweepTemperature => ("sweep-temperature", commands::sweep_temperature(&cfg)?),
        Command::FitScan { input } => {
            inputs.push(read_input(input)?);
            ("fit-scan", commands::fit_scan(&cfg, &inputs[0].1)?)
        }
        Command::FitSeries { input, model } => {
            inputs.push(read_input(input)?);
            let (label, model) = match model {
                ModelArg::Linear => ("linear", SeriesModel::Linear),
                ModelArg::Exchange => ("exchange", SeriesModel::Exchange),
                ModelArg::ExchangeScaled => ("exchange-scaled", SeriesModel::ExchangeScaled),
                ModelArg::Both => ("both", SeriesModel::Both),
            };
            options.push(format!("model={label}"));
            ("fit-series", commands::fit_series(&cfg, &inputs[0].1, model)?)
        }
        Command::Synth { kind, noise } => {
            let (label, kind) = match kind {
                KindArg::Scan => ("scan", SynthKind::Scan),
                KindArg::Series => ("series", SynthKind::Series),
            };
            options.push(format!("kind={label}"));
            options.push(format!("noise={noise}"));
            ("synth", commands::synth(&cfg, kind, *noise, cfg.seed)?)
        }
    };
    let manifest = Manifest::new(
        RunRecord {
            command: name,
            options,
            config: &cfg,
            inputs,
        },
        &outputs,
        &clock,
    );
    write_run(&cli.out, &outputs, &manifest)?;
    for o in &outputs {
        println!("{}", cli.out.join(&o.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
