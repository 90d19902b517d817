//! Command-line front end shared by the `risk-bandits` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{resolve, ConfigFile, Experiment, Overrides, ResolvedConfig};
use crate::error::{Error, Result};
use crate::harness::{default_workers, run_bai, run_rm};
use crate::plot::{kind_for, render, PlotKind};
use crate::presets;
use crate::report::{bai_csv, manifest_json, read_table, rm_csv, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "risk-bandits", version, about = "Sharpe-ratio bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Source {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset; see `presets`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<u64>,
    /// Use 10^4 regret-minimisation replications unless set explicitly.
    #[arg(long)]
    pub full_fidelity: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an experiment and write results.csv, results.svg and manifest.json.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "RISK_BANDITS_WORKERS")]
        workers: Option<usize>,
    },
    /// List the named presets.
    Presets,
    /// Render a results CSV as SVG.
    Plot {
        csv: PathBuf,
        /// `regret` or `error_prob`; inferred from the CSV header when omitted.
        #[arg(long)]
        kind: Option<String>,
        /// Output file, defaults to the CSV path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
}

fn resolve_source(source: &Source, out: Option<&Path>) -> Result<ResolvedConfig> {
    let file = source.config.as_deref().map(ConfigFile::load).transpose()?;
    if file.is_none() && source.preset.is_none() {
        return Err(Error::Config("either --config or --preset is required".into()));
    }
    let ov = Overrides {
        seed: source.seed,
        replications: source.replications,
        output_dir: out.map(|p| p.display().to_string()),
        full_fidelity: source.full_fidelity,
    };
    resolve(file, source.preset.as_deref(), &ov)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn cmd_run(source: &Source, out: Option<&Path>, workers: Option<usize>) -> Result<()> {
    let resolved = resolve_source(source, out)?;
    let workers = workers.filter(|&w| w >= 1).unwrap_or_else(default_workers);
    let experiment = resolved.build(workers)?;
    let started = Instant::now();
    let csv = match &experiment {
        Experiment::Rm(exp) => {
            log::info!(
                "regret run: K={}, n={}, R={}, {} policies, {workers} workers",
                exp.instance.k(),
                exp.horizon,
                exp.replications,
                exp.policies.len()
            );
            rm_csv(&run_rm(exp)?, exp.bounds_overlay)?
        }
        Experiment::Bai(exp) => {
            log::info!(
                "best-arm run: {} cells, R={}, {} policies, {workers} workers",
                exp.cells.len(),
                exp.replications,
                exp.policies.len()
            );
            bai_csv(&run_bai(exp)?)?
        }
    };
    let wall = started.elapsed().as_secs_f64();

    let dir = PathBuf::from(&resolved.output_dir);
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("results.csv");
    write(&csv_path, &csv)?;
    let table = read_table(&csv_path)?;
    write(&dir.join("results.svg"), render(&table, kind_for(table.schema))?.as_bytes())?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: &resolved,
        results: "results.csv".into(),
        wall_time_seconds: wall,
    };
    write(&dir.join("manifest.json"), manifest_json(&manifest)?.as_bytes())?;
    println!("wrote {} ({wall:.2} s)", csv_path.display());
    Ok(())
}

fn cmd_presets() {
    for p in presets::all() {
        println!("{:<22} {}", p.name, p.description);
    }
}

fn cmd_plot(csv: &Path, kind: Option<&str>, out: Option<&Path>) -> Result<()> {
    let table = read_table(csv)?;
    let kind = match kind {
        Some(k) => k.parse::<PlotKind>()?,
        None => kind_for(table.schema),
    };
    let svg = render(&table, kind)?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| csv.with_extension("svg"));
    write(&target, svg.as_bytes())?;
    println!("wrote {}", target.display());
    Ok(())
}

fn cmd_validate(source: &Source) -> Result<()> {
    let resolved = resolve_source(source, None)?;
    resolved.build(1)?;
    println!("config ok: mode {:?}, {} instance(s)", resolved.mode, resolved.instances.len());
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run { source, out, workers } => cmd_run(source, out.as_deref(), *workers),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
        Command::Plot { csv, kind, out } => cmd_plot(csv, kind.as_deref(), out.as_deref()),
        Command::Validate { source } => cmd_validate(source),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
