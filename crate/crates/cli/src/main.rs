//! `zeno-lab`: spectra, survival curves and Zeno scans of the two-level
//! continuum model, written as CSV with optional SVG plots.

mod config;
mod experiments;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::{ConfigError, Preset, RunConfig};
use experiments::Experiment;
use output::Artifact;

#[derive(Debug, Parser)]
#[command(
    name = "zeno-lab",
    version,
    about = "Survival, Zeno and anti-Zeno experiments on a two-level continuum model"
)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML file with [params] and [run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in starting configuration; a config file overrides it key by key.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    /// Overrides run.t_max.
    #[arg(long)]
    t_max: Option<f64>,
}

fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let base = cli.preset.map(RunConfig::preset).unwrap_or_default();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path, &base)?,
        None => base,
    };
    if cli.plot {
        cfg.run.plot = true;
    }
    if let Some(t) = cli.t_max {
        cfg.run.t_max = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var("ZENO_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("ZENO_LAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli, mut cfg: RunConfig) -> Result<Vec<PathBuf>> {
    let name = cli.experiment.name();
    // Reserve every output before computing so an unwritable path fails fast.
    let csv = Artifact::reserve(&cli.out, &format!("{name}.csv"))?;
    let svg = if cfg.run.plot { Some(Artifact::reserve(&cli.out, &format!("{name}.svg"))?) } else { None };

    let (table, plot) = cli.experiment.run(&mut cfg).with_context(|| format!("{name} failed"))?;
    let header = format!("zeno-lab {name}\n{}", cfg.to_toml());
    let mut written = vec![csv.commit(&table.render(&header))?];
    if let Some(svg) = svg {
        match plot {
            Some(plot) => written.push(svg.commit(&plot.render())?),
            None => eprintln!("note: {name} has no plot; skipped {}", svg.path().display()),
        }
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure_threads().and_then(|_| resolve(&cli)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, cfg) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
