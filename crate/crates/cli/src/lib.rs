//! Command-line front end for the `fastslow` library.
//!
//! Settings are resolved from defaults, then a `--config` file (`key = value`
//! lines or a JSON run manifest), then `--set key=value` overrides and the
//! dedicated flags. Every output file is written with a `<file>.manifest.json`
//! holding the resolved configuration, so a run can be repeated from its
//! manifest alone.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

use config::{ExperimentConfig, RawConfig, Subcommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("bracket failure: {0}")]
    Bracket(String),
    #[error("all {0} sweep rows failed")]
    AllRowsFailed(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 2 config, 3 integration, 4 bracket, 5 every sweep row failed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Bracket(_) => 4,
            CliError::AllRowsFailed(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Integrate one trajectory and write t,x1,x2,lambda (or t,x1,w).
    Simulate {
        /// Write co-moving coordinates (t,x1,w) instead of the full system.
        #[arg(long)]
        comoving: bool,
    },
    /// Report the analytic and numerically located Hopf rate.
    Hopf,
    /// Sweep the rate and write the max-distance curve of the attractor.
    Sweep,
    /// Write the vector field on a grid plus critical-manifold samples.
    Portrait,
}

#[derive(Debug, Parser)]
#[command(name = "fastslow", version, about = "Rate-induced tipping experiments for planar fast/slow systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines or a JSON run manifest).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Initial offset in x1 from the equilibrium.
    #[arg(long = "seed-perturbation", global = true, value_name = "REAL")]
    seed_perturbation: Option<f64>,
    #[arg(long, global = true, value_name = "REAL")]
    rtol: Option<f64>,
    #[arg(long, global = true, value_name = "REAL")]
    atol: Option<f64>,
    /// Worker threads for sweeps without warm start.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long = "warm-start", global = true, value_enum)]
    warm_start: Option<OnOff>,
    /// Add a `tipped` column: max_distance > REAL.
    #[arg(long = "tipping-radius", global = true, value_name = "REAL")]
    tipping_radius: Option<f64>,
    /// Override any configuration key.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn raw_config(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => config::load_file(path)?,
            None => RawConfig::new(),
        };
        for s in &self.set {
            let (k, v) = config::parse_override(s)?;
            raw.insert(k, v);
        }
        let mut flag = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                raw.insert(k.to_string(), v);
            }
        };
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        flag("out", self.out.as_ref().map(|p| p.display().to_string()));
        flag(
            "format",
            self.format.map(|f| match f {
                FormatArg::Csv => "csv".into(),
                FormatArg::Json => "json".into(),
            }),
        );
        flag("perturbation", num(self.seed_perturbation));
        flag("rtol", num(self.rtol));
        flag("atol", num(self.atol));
        flag("workers", self.workers.map(|w| w.to_string()));
        flag(
            "warm_start",
            self.warm_start.map(|w| match w {
                OnOff::On => "on".into(),
                OnOff::Off => "off".into(),
            }),
        );
        flag("tipping_radius", num(self.tipping_radius));
        if let Command::Simulate { comoving: true } = self.command {
            flag("coords", Some("comoving".into()));
        }
        Ok(raw)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let command = match cli.command {
        Command::Simulate { .. } => Subcommand::Simulate,
        Command::Hopf => Subcommand::Hopf,
        Command::Sweep => Subcommand::Sweep,
        Command::Portrait => Subcommand::Portrait,
    };
    let cfg = ExperimentConfig::resolve(command, cli.raw_config()?)?;
    match command {
        Subcommand::Simulate => commands::simulate(&cfg),
        Subcommand::Hopf => commands::hopf(&cfg),
        Subcommand::Sweep => commands::sweep(&cfg),
        Subcommand::Portrait => commands::portrait(&cfg),
    }
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fastslow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
