//! Batch command surface for the seismic surrogate toolkit.
//!
//! Every command reads one TOML experiment config, writes its artifacts
//! into the output directory and always leaves a `run_manifest.json`
//! there, including when it fails after argument parsing.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use config::{Experiment, ExperimentConfig, Overrides, Structure};
use manifest::RunManifest;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "surrogate", version, about = "Seismic response oracles and adaptive neural surrogates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `out_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// AT2 files to use instead of `records.files`.
    #[arg(long, global = true)]
    pub records: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    Frame,
    Rocking,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an oracle on every record.
    Simulate {
        /// Defaults to the configured structure.
        which: Option<Which>,
    },
    /// Write the scaled records and their scale factors.
    Scale,
    /// Elastic response spectra of the records.
    Spectrum,
    /// Train a surrogate on the configured training motions.
    Train,
    /// Closed-loop evaluation of a trained surrogate.
    Eval {
        #[arg(long)]
        network: Option<PathBuf>,
    },
    /// Oracle versus surrogate timing.
    Bench {
        #[arg(long)]
        network: Option<PathBuf>,
    },
    /// Plot ground motion and oracle response per record.
    Plot,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Scale => "scale",
            Command::Spectrum => "spectrum",
            Command::Train => "train",
            Command::Eval { .. } => "eval",
            Command::Bench { .. } => "bench",
            Command::Plot => "plot",
        }
    }
}

fn dispatch(cli: &Cli, manifest: &mut RunManifest) -> anyhow::Result<Vec<String>> {
    let path = cli.config.as_ref().ok_or_else(|| error::user("--config <path> is required"))?;
    let overrides = Overrides { seed: cli.seed, out: cli.out.clone(), records: cli.records.clone() };
    let exp = Experiment::load(path, &overrides)?;
    manifest.config_hash = Some(exp.config_hash.clone());
    manifest.seed = Some(exp.seed);
    let out = match &cli.command {
        Command::Simulate { which } => {
            let which = which.map(|w| match w {
                Which::Frame => Structure::Frame,
                Which::Rocking => Structure::Rocking,
            });
            commands::cmd_simulate(&exp, which)
        }
        Command::Scale => commands::cmd_scale(&exp),
        Command::Spectrum => commands::cmd_spectrum(&exp),
        Command::Train => commands::cmd_train(&exp),
        Command::Eval { network } => commands::cmd_eval(&exp, network.as_deref()),
        Command::Bench { network } => commands::cmd_bench(&exp, network.as_deref()),
        Command::Plot => commands::cmd_plot(&exp),
    }?;
    Ok(out.0)
}

/// Output directory for the manifest when the config may be unusable.
fn manifest_dir(cli: &Cli) -> PathBuf {
    if let Some(out) = &cli.out {
        return out.clone();
    }
    cli.config
        .as_ref()
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| ExperimentConfig::parse(&t).ok())
        .map(|c| c.out_dir)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let start = Instant::now();
    let mut manifest = RunManifest::new(cli.command.name());
    let result = dispatch(&cli, &mut manifest);
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let code = match result {
        Ok(outputs) => {
            manifest.status = "ok".into();
            manifest.outputs = outputs;
            error::EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            manifest.status = "error".into();
            manifest.error = Some(format!("{e:#}"));
            error::exit_code(&e)
        }
    };
    if let Err(e) = manifest.write(&manifest_dir(&cli)) {
        eprintln!("error: cannot write run manifest: {e}");
        return code.max(error::EXIT_INTERNAL);
    }
    code
}
