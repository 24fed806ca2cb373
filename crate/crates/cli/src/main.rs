//! `condensate`: run trajectories and ensembles, evaluate closed forms, and
//! export figure data.
//!
//! Exit status is 0 on success, 2 for configuration or parameter errors and
//! 1 for anything that fails while running.

mod config;
mod figures;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use condensate::output::{write_curve_csv, write_series_csv, Series};
use condensate::theory::{ApproxParams, Formula};
use condensate::trajectory::{run_ensemble, run_trajectory, DetectionEvent, Record};
use serde::Serialize;

use crate::config::{parse_rate, parse_reals, SimArgs};
use crate::figures::{FigureId, FigureOptions};
use crate::manifest::{write_output, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(condensate::Error),
    Io(std::io::Error),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Core(condensate::Error::Config { .. })
            | CliError::Core(condensate::Error::Domain(_)) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e @ condensate::Error::Config { .. }) => {
                write!(f, "configuration error: {e}")
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<condensate::Error> for CliError {
    fn from(e: condensate::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser)]
#[command(name = "condensate", version, about = "Quantum-trajectory simulation of interfering leaky condensates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write its events and records as JSON
    Trajectory(TrajectoryCmd),
    /// Average observables over many trajectories; one CSV per observable
    Ensemble(EnsembleCmd),
    /// Evaluate a closed-form approximation or oracle
    Theory(TheoryCmd),
    /// Write every data series behind a figure
    Figure(FigureCmd),
}

#[derive(Args)]
struct TrajectoryCmd {
    #[command(flatten)]
    sim: SimArgs,
    /// Output JSON file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest file (default: <out>.manifest.json when --out is given)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleCmd {
    #[command(flatten)]
    sim: SimArgs,
    /// Number of trajectories
    #[arg(long)]
    traj: usize,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "CONDENSATE_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TheoryCmd {
    /// Formula name; `--list` shows the registry
    formula: Option<String>,
    /// List formulas and their parameters
    #[arg(long)]
    list: bool,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    n1: Option<String>,
    #[arg(long)]
    n2: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Collision rate; a trailing `g` means units of gamma
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    /// CSV output for swept parameters (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureCmd {
    id: FigureId,
    /// Trajectories per Monte Carlo series (default per figure)
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long, env = "CONDENSATE_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct TrajectoryOutput<'a> {
    events: &'a [DetectionEvent],
    records: &'a [Record],
    final_atoms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_time: Option<f64>,
}

fn cmd_trajectory(cmd: TrajectoryCmd) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = cmd.sim.resolve()?;
    let mut manifest = RunManifest::new("trajectory", cfg.seed);
    let traj = run_trajectory::<f64>(&cfg)?;
    let out = TrajectoryOutput {
        events: &traj.events,
        records: &traj.records,
        final_atoms: traj.final_state.total_atoms(),
        final_time: traj.final_time,
    };
    let mut bytes = serde_json::to_vec_pretty(&out).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    manifest.configs.push(cfg);
    let manifest_path = match (&cmd.out, cmd.manifest) {
        (Some(path), m) => {
            write_output(&mut manifest, path.clone(), bytes)?;
            Some(m.unwrap_or_else(|| sibling(path, "manifest.json")))
        }
        (None, m) => {
            std::io::stdout().write_all(&bytes)?;
            manifest.record_output(Path::new("stdout"), &bytes);
            m
        }
    };
    if let Some(p) = manifest_path {
        manifest.finish(start.elapsed());
        manifest.write(&p)?;
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

fn cmd_ensemble(cmd: EnsembleCmd) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = cmd.sim.resolve()?;
    if cfg.record_k.is_empty() && cfg.record_t.is_empty() {
        return Err(CliError::Config("ensemble needs --record-k or --record-t".into()));
    }
    let ens = run_ensemble(&cfg, cmd.traj, cmd.workers)?;
    std::fs::create_dir_all(&cmd.out_dir)?;
    let mut manifest = RunManifest::new("ensemble", cfg.seed);
    manifest.n_traj = Some(cmd.traj);
    manifest.workers = Some(cmd.workers);
    for curve in &ens.curves {
        let mut bytes = Vec::new();
        write_curve_csv(&mut bytes, curve)?;
        let name = format!("{}_{}.csv", curve.observable.name(), curve.axis.name());
        write_output(&mut manifest, cmd.out_dir.join(name), bytes)?;
    }
    manifest.configs.push(cfg);
    manifest.finish(start.elapsed());
    manifest.write(&cmd.out_dir.join("manifest.json"))?;
    Ok(())
}

fn registry_listing() -> String {
    Formula::ALL
        .iter()
        .map(|f| format!("  {:<20} {}", f.name(), f.parameters()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_theory(cmd: TheoryCmd) -> Result<(), CliError> {
    if cmd.list {
        println!("{}", registry_listing());
        return Ok(());
    }
    let name = cmd
        .formula
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("missing formula; known:\n{}", registry_listing())))?;
    let formula = Formula::from_name(name).ok_or_else(|| {
        CliError::Config(format!("unknown formula `{name}`; known:\n{}", registry_listing()))
    })?;
    let gamma = cmd.gamma.unwrap_or(1.0);
    let list = |v: &Option<String>, field: &str| -> Result<Option<Vec<f64>>, CliError> {
        v.as_deref()
            .map(|s| parse_reals(s).map_err(|e| CliError::Config(format!("{field}: {e}"))))
            .transpose()
    };
    let kappa = cmd
        .kappa
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|x| parse_rate(x, gamma))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| CliError::Config(format!("kappa: {e}")))
        })
        .transpose()?;
    let params: [(&str, Option<Vec<f64>>); 8] = [
        ("n", list(&cmd.n, "n")?),
        ("n1", list(&cmd.n1, "n1")?),
        ("n2", list(&cmd.n2, "n2")?),
        ("k", list(&cmd.k, "k")?),
        ("eta", list(&cmd.eta, "eta")?),
        ("kappa", kappa),
        ("t", list(&cmd.t, "t")?),
        ("phi", list(&cmd.phi, "phi")?),
    ];
    let swept: Vec<&str> = params
        .iter()
        .filter(|(_, v)| v.as_ref().is_some_and(|v| v.len() > 1))
        .map(|(n, _)| *n)
        .collect();
    if swept.len() > 1 {
        return Err(CliError::Config(format!(
            "only one parameter may be swept, got {}",
            swept.join(", ")
        )));
    }
    let point = |sweep: Option<f64>| {
        let pick = |name: &str| -> Option<f64> {
            params.iter().find(|(n, _)| *n == name).and_then(|(_, v)| {
                v.as_ref().map(|v| if swept.first() == Some(&name) { sweep.unwrap_or(v[0]) } else { v[0] })
            })
        };
        ApproxParams {
            n: pick("n"),
            n1: pick("n1"),
            n2: pick("n2"),
            k: pick("k"),
            eta: pick("eta"),
            gamma: Some(gamma),
            kappa: pick("kappa"),
            t: pick("t"),
            phi: pick("phi"),
        }
    };
    match swept.first() {
        None => {
            println!("{}", formula.evaluate(&point(None))?);
            Ok(())
        }
        Some(name) => {
            let xs = params.iter().find(|(n, _)| n == name).and_then(|(_, v)| v.clone()).unwrap_or_default();
            let ys = xs
                .iter()
                .map(|&x| Ok((x, formula.evaluate(&point(Some(x)))?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let series = Series::exact(formula.name(), ys);
            let curve = condensate::trajectory::EnsembleCurve {
                observable: condensate::trajectory::Observable::Beta,
                axis: condensate::trajectory::Axis::DetectionCount,
                points: series.points,
            };
            let mut bytes = Vec::new();
            write_curve_csv(&mut bytes, &curve)?;
            match cmd.out {
                Some(p) => std::fs::write(p, bytes)?,
                None => std::io::stdout().write_all(&bytes)?,
            }
            Ok(())
        }
    }
}

fn cmd_figure(cmd: FigureCmd) -> Result<(), CliError> {
    let start = Instant::now();
    let opts = FigureOptions {
        traj: cmd.traj,
        workers: cmd.workers,
        seed: cmd.seed,
    };
    let bundle = figures::build(cmd.id, &opts)?;
    std::fs::create_dir_all(&cmd.out_dir)?;
    let mut manifest = RunManifest::new(format!("figure {}", cmd.id.name()), cmd.seed);
    manifest.n_traj = cmd.traj;
    manifest.workers = Some(cmd.workers);
    let mut bytes = Vec::new();
    write_series_csv(&mut bytes, &bundle.series)?;
    write_output(&mut manifest, cmd.out_dir.join(format!("{}.csv", cmd.id.name())), bytes)?;
    manifest.configs = bundle.configs;
    manifest.finish(start.elapsed());
    manifest.write(&cmd.out_dir.join(format!("{}.manifest.json", cmd.id.name())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trajectory(c) => cmd_trajectory(c),
        Command::Ensemble(c) => cmd_ensemble(c),
        Command::Theory(c) => cmd_theory(c),
        Command::Figure(c) => cmd_figure(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("condensate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
