//! Command line, configuration loading and run output directories.
//!
//! A run directory holds `series.csv`, `snapshots/` and `manifest.toml`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{compute_record, csv_err, snapshot_distribution, EntropyGrid, Series, SeriesWriter};
use crate::error::{Error, Result};
use crate::hermite_basis::HermiteBasis;
use crate::integrator::{kinetic_energy, SimulationState, Solver};
use crate::scenarios::{ScenarioConfig, PRESETS};

#[derive(Debug, Parser)]
#[command(name = "vpfp", version, about = "Hermite-DG Vlasov-Poisson-Fokker-Planck solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full simulation.
    Run(CommonArgs),
    /// Limit model only: prints the limit temperature and writes the limit potential.
    Limit(CommonArgs),
    /// Initial projection report.
    Project(CommonArgs),
    /// Repeats `run` for several values of eps, one directory each.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma separated list, e.g. 1e-3,1e-2,1e-1,1
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Named preset (one_species_5_1, two_species_5_2, two_species_5_2_nu_ee_0_1).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub nh: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, value_enum)]
    pub adaptive: Option<OnOff>,
    /// Lax-Friedrichs viscosity override.
    #[arg(long)]
    pub delta: Option<f64>,
}

/// Loads the preset or file named by `args` and applies the flag overrides.
pub fn load_config(args: &CommonArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => ScenarioConfig::preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            ScenarioConfig::from_toml(&text).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        _ => {
            return Err(Error::Config(format!(
                "exactly one of --preset ({}) or --config is required",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(dt) = args.dt {
        cfg.time.dt = Some(dt);
        cfg.time.dt_over_eps = None;
    }
    if let Some(t) = args.t_end {
        cfg.time.t_end = Some(t);
        cfg.time.t_end_over_eps = None;
    }
    if let Some(nh) = args.nh {
        cfg.hermite.nh = nh;
    }
    if let Some(nx) = args.nx {
        cfg.mesh.nx = nx;
    }
    if let Some(a) = args.adaptive {
        cfg.adaptive.enabled = a == OnOff::On;
    }
    if let Some(d) = args.delta {
        cfg.transport.delta = Some(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub start_unix: f64,
    pub end_unix: f64,
    /// `completed` or `failed: <message>`.
    pub status: String,
    pub steps: usize,
    pub final_time: f64,
    pub files: Vec<String>,
    pub config: ScenarioConfig,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes `manifest.toml` through a temporary file and a rename.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let text = toml::to_string(manifest).map_err(|e| Error::Config(e.to_string()))?;
    let tmp = dir.join("manifest.toml.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, dir.join("manifest.toml"))?;
    Ok(())
}

/// Step indices at which snapshots are taken.
fn snapshot_steps(cfg: &ScenarioConfig, dt: f64) -> Vec<(usize, f64)> {
    cfg.output
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).round() as usize, t))
        .collect()
}

/// Runs a configuration into `dir`. The series is flushed and the manifest
/// written even when a step fails; the step error is returned afterwards.
pub fn run_to_dir(cfg: &ScenarioConfig, dir: &Path) -> Result<RunManifest> {
    let start = unix_now();
    fs::create_dir_all(dir.join("snapshots"))?;
    let mut files = vec!["series.csv".to_string()];
    let mut writer = SeriesWriter::create(&dir.join("series.csv"))?;
    let mut steps = 0;
    let mut final_time = 0.0;
    let outcome = (|| -> Result<()> {
        let (solver, mut state) = Solver::initialize(cfg)?;
        let grid = EntropyGrid {
            width: cfg.output.entropy_width,
            n_v: cfg.output.entropy_nv,
        };
        let snaps = snapshot_steps(cfg, solver.cfg.dt);
        let n_steps = solver.n_steps();
        let every = cfg.output.every.max(1);
        let mut series = Series::new(solver.params.eps);
        let result = solver.run(&mut state, |s, st: &SimulationState, _| {
            if st.step.is_multiple_of(every) || st.step == n_steps {
                writer.write(&series.push(compute_record(s, st, &grid)))?;
            }
            for (k, (step, t)) in snaps.iter().enumerate() {
                if *step == st.step {
                    let snap = snapshot_distribution(
                        s,
                        st,
                        cfg.output.snapshot_nx,
                        cfg.output.snapshot_vmax,
                        cfg.output.snapshot_nv,
                    );
                    let name = format!("snapshots/f_{k:02}_t{t}.txt");
                    snap.write_to(&dir.join(&name))?;
                    files.push(name);
                }
            }
            steps = st.step;
            final_time = st.time;
            Ok(())
        });
        writer.flush()?;
        result
    })();
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        start_unix: start,
        end_unix: unix_now(),
        status: match &outcome {
            Ok(()) => "completed".into(),
            Err(e) => format!("failed: {e}"),
        },
        steps,
        final_time,
        files,
        config: cfg.clone(),
    };
    write_manifest(dir, &manifest)?;
    outcome.map(|_| manifest)
}

/// Limit solve for the initial data: prints `T̄` and writes `phi_bar.csv`.
pub fn limit_command(cfg: &ScenarioConfig, dir: &Path, out: &mut impl Write) -> Result<()> {
    let (solver, state) = Solver::initialize(cfg)?;
    let lim = &state.limit;
    writeln!(out, "t_bar = {:.16e}", lim.t_bar)?;
    writeln!(out, "v_th = {:.16e}", lim.t_bar.sqrt())?;
    writeln!(out, "energy = {:.16e}", state.budget.total_energy)?;
    writeln!(out, "boltzmann_constant = {:.16e}", lim.c)?;
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("phi_bar.csv")).map_err(csv_err)?;
    w.write_record(["x", "phi_bar", "n_e_bar"]).map_err(csv_err)?;
    let n = 4 * solver.mesh.n_cells;
    for i in 0..n {
        let x = (i as f64 + 0.5) * solver.mesh.length / n as f64;
        w.write_record([
            format!("{x:.16e}"),
            format!("{:.16e}", lim.phi_bar.eval(&solver.mesh, x)),
            format!("{:.16e}", lim.n_e_bar.eval(&solver.mesh, x)),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Projection report of the initial data.
pub fn project_command(cfg: &ScenarioConfig, out: &mut impl Write) -> Result<()> {
    let (solver, state) = Solver::initialize(cfg)?;
    let mesh = &solver.mesh;
    let c = &state.coeffs;
    let basis: &HermiteBasis = &state.basis;
    writeln!(out, "cells = {}, order = {}, modes = {}", mesh.n_cells, mesh.order, basis.n_modes)?;
    writeln!(out, "v_th = {:.16e}", basis.v_th)?;
    writeln!(out, "mass = {:.16e}", c.mode_function(mesh, 0).integral(mesh))?;
    writeln!(out, "ion mass = {:.16e}", solver.n_i().integral(mesh))?;
    writeln!(out, "momentum = {:.16e}", basis.v_th * c.mode_function(mesh, 1).integral(mesh))?;
    writeln!(out, "kinetic energy = {:.16e}", kinetic_energy(mesh, basis.v_th, c))?;
    writeln!(out, "field energy = {:.16e}", solver.poisson.field_energy(&state.field.phi))?;
    writeln!(out, "total energy = {:.16e}", state.budget.total_energy)?;
    writeln!(out, "active modes = {}", c.active_count())?;
    for k in 0..basis.n_modes {
        writeln!(out, "|alpha_{k}|_L2 = {:.6e}", c.mode_l2(k))?;
    }
    Ok(())
}

fn eps_dir_name(eps: f64) -> String {
    format!("eps_{eps:e}")
}

/// Runs each eps in its own thread and directory; returns the first error after all finish.
pub fn sweep(cfg: &ScenarioConfig, eps: &[f64], root: &Path) -> Result<Vec<PathBuf>> {
    let jobs: Vec<(ScenarioConfig, PathBuf)> = eps
        .iter()
        .map(|&e| {
            let mut c = cfg.clone();
            c.scenario.eps = e;
            c.validate().map(|_| (c, root.join(eps_dir_name(e))))
        })
        .collect::<Result<_>>()?;
    let results: Vec<Result<PathBuf>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(c, d)| {
                s.spawn(move || {
                    info!("sweep: eps = {} into {}", c.scenario.eps, d.display());
                    run_to_dir(c, d).map(|_| d.clone())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Io(std::io::Error::other("sweep worker panicked")))))
            .collect()
    });
    results.into_iter().collect()
}

/// Dispatches a parsed command line.
pub fn cli_run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let m = run_to_dir(&cfg, &args.out)?;
            writeln!(out, "completed {} steps to t = {} in {}", m.steps, m.final_time, args.out.display())?;
        }
        Command::Limit(args) => limit_command(&load_config(&args)?, &args.out, out)?,
        Command::Project(args) => project_command(&load_config(&args)?, out)?,
        Command::Sweep { common, eps } => {
            let cfg = load_config(&common)?;
            for d in sweep(&cfg, &eps, &common.out)? {
                writeln!(out, "{}", d.display())?;
            }
        }
    }
    Ok(())
}

/// Machine-readable failure line.
pub fn error_line(e: &Error) -> String {
    format!("error kind={} message={:?}", e.kind(), e.to_string())
}
