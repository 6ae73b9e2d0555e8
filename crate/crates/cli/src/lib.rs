//! Command line front end: configuration, presets, pipelines and artifacts.

pub mod config;
pub mod pipeline;
mod plots;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{Pipeline, RunConfig};
pub use pipeline::{execute, Outcome, Report, RunError};

#[derive(Debug, Parser)]
#[command(
    name = "hetkern",
    version,
    about = "Heat kernels of 1-D heterogeneous parabolic operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Corrector(RunArgs),
    Eigen(RunArgs),
    Kernel(RunArgs),
    Green(RunArgs),
    Verify(RunArgs),
    All(RunArgs),
    /// List the built-in presets, or print one as TOML.
    Presets {
        name: Option<String>,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration by name.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_plots: bool,
    /// Replaces the seeds of random fields.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Halves the grid spacing this many times.
    #[arg(long, default_value_t = 0)]
    pub grid_refine: u32,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

fn load(args: &RunArgs, pipeline: Pipeline) -> Result<RunConfig, RunError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| RunError::Config(e.0))?
        }
        (None, Some(name)) => presets::preset(name)
            .ok_or_else(|| RunError::Config(format!("unknown preset {name:?}")))?,
        (None, None) => {
            return Err(RunError::Config(
                "one of --config and --preset is required".into(),
            ))
        }
    };
    cfg.pipeline = pipeline;
    cfg.apply_overrides(args.seed, args.grid_refine);
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    Ok(cfg)
}

fn write_outputs(dir: &Path, cfg: &RunConfig, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    match fs::remove_file(dir.join("error.json")) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e),
        _ => {}
    }
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    fs::write(dir.join("report.json"), json + "\n")?;
    for (name, body) in &outcome.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
    }
    Ok(())
}

fn write_error(dir: &Path, err: &RunError) {
    let record = ErrorRecord {
        kind: err.kind(),
        message: err.message(),
        exit_code: err.exit_code(),
    };
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    if fs::create_dir_all(dir)
        .and_then(|_| fs::write(dir.join("error.json"), json + "\n"))
        .is_err()
    {
        eprintln!("could not write error.json to {}", dir.display());
    }
}

/// Caps the worker pool from `HETKERN_THREADS`, if set.
fn init_pool() {
    if let Some(n) = std::env::var("HETKERN_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Runs one pipeline; returns the process exit code.
pub fn run_pipeline(args: &RunArgs, pipeline: Pipeline) -> i32 {
    init_pool();
    let fallback = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match load(args, pipeline) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            write_error(&fallback, &e);
            return e.exit_code();
        }
    };
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or(fallback);
    match execute(&cfg, args.emit_plots) {
        Ok(outcome) => {
            if let Err(e) = write_outputs(&dir, &cfg, &outcome) {
                eprintln!("error: writing {}: {e}", dir.display());
                return 3;
            }
            for e in &outcome.report.entries {
                println!(
                    "{:4} {:40} {:>14.6e} (threshold {:.3e})",
                    if e.pass { "ok" } else { "FAIL" },
                    e.check,
                    e.measured,
                    e.threshold
                );
            }
            if outcome.report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {} ({})", e.message(), e.kind());
            write_error(&dir, &e);
            e.exit_code()
        }
    }
}

pub fn main_with(cli: Cli) -> i32 {
    let (args, pipeline) = match cli.command {
        Command::Corrector(a) => (a, Pipeline::Corrector),
        Command::Eigen(a) => (a, Pipeline::Eigen),
        Command::Kernel(a) => (a, Pipeline::Kernel),
        Command::Green(a) => (a, Pipeline::Green),
        Command::Verify(a) => (a, Pipeline::Verify),
        Command::All(a) => (a, Pipeline::All),
        Command::Presets { name: None } => {
            for (name, _) in presets::presets() {
                println!("{name}");
            }
            return 0;
        }
        Command::Presets { name: Some(name) } => {
            return match presets::preset(&name) {
                Some(cfg) => {
                    print!("{}", cfg.to_toml());
                    0
                }
                None => {
                    eprintln!("unknown preset {name:?}");
                    2
                }
            };
        }
    };
    run_pipeline(&args, pipeline)
}
