//! `ptsol`: stationary checks, stability spectra, parameter sweeps and
//! direct propagation for PT-symmetric solitons with competing nonlinearity.

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Parser)]
#[command(name = "ptsol", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set model.a=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Grid size and half-width, e.g. `--grid 512,16`.
    #[arg(long, value_name = "N,L", global = true)]
    grid: Option<String>,
    /// Output directory (defaults to `output.dir` of the configuration).
    #[arg(long, env = "PTSOL_OUT", global = true)]
    out: Option<PathBuf>,
    /// Seed for the propagation noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Skip SVG output.
    #[arg(long, global = true)]
    no_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve the constraints and check the closed-form field.
    Validate,
    /// Certified stability spectrum at one parameter point.
    Spectrum,
    /// Spectrum along a parameter range with bifurcation detection.
    Sweep,
    /// Split-step evolution of the perturbed stationary field.
    Propagate,
    /// Analytic continuous-spectrum locus.
    Band,
    /// Reference eigenmode portraits.
    Figures {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Propagate => "propagate",
            Command::Band => "band",
            Command::Figures { .. } => "figures",
        }
    }
}

fn parse_grid(text: &str) -> Result<(usize, f64), CliError> {
    let bad = || CliError::Config(format!("--grid {text}: expected N,L"));
    let (n, l) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        n.trim().parse().map_err(|_| bad())?,
        l.trim().parse().map_err(|_| bad())?,
    ))
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for assignment in &cli.overrides {
        config.set(assignment)?;
    }
    if let Some(text) = &cli.grid {
        (config.grid.n, config.grid.half_width) = parse_grid(text)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out {
        config.output.dir = dir.display().to_string();
    }
    if cli.no_plots {
        config.output.plots = false;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let config = resolve_config(cli)?;
    let mut out = OutputDir::create(PathBuf::from(&config.output.dir), config.output.plots)?;
    match &cli.command {
        Command::Validate => commands::validate(&config, &mut out)?,
        Command::Spectrum => {
            commands::spectrum(&config, &config.model, "spectrum", &mut out)?;
        }
        Command::Sweep => commands::sweep(&config, &mut out)?,
        Command::Propagate => commands::propagate(&config, &mut out)?,
        Command::Band => commands::band(&config, &mut out)?,
        Command::Figures { figure } => {
            let name = figure.to_possible_value().expect("named variant");
            commands::figure(name.get_name(), &config, &mut out)?;
        }
    }
    out.manifest(cli.command.name(), &config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            println!("manifest: {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
