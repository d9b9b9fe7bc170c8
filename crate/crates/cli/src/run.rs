//! `simulate`, `trace` and `oracle`: config in, artifact directory out.

use std::path::{Path, PathBuf};

use gch_core::characteristics::{check_characteristic_laws, TraceContext};
use gch_core::evolution::{integrate_with, Trajectory};
use gch_core::grid::XiGrid;
use gch_core::init::{auto_grid, initial_state, initial_state_from_map};
use gch_core::oracle::{solve_eulerian, EulerianSolverConfig};
use gch_core::params::ModelParams;
use gch_core::reconstruction::{energy_measure_full, to_eulerian};
use gch_core::state::LagrangianState;
use gch_core::Initial;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{self, SeriesRow};
use crate::manifest::{
    sha256_hex, GridRecord, Manifest, OracleFrame, OracleRecord, OutputRecord, ParamsRecord, SnapshotRecord, Summary,
    TimeRecord, TraceRecord, MANIFEST_FILE,
};

/// Environment variable naming the directory that receives run directories.
pub const OUTPUT_ROOT_ENV: &str = "GCH_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Everything the config enables.
    Simulate,
    /// Time series plus characteristic traces.
    Trace,
    /// Time series plus the Eulerian reference run and its comparison.
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Trace => "trace",
            Command::Oracle => "oracle",
        }
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Debug, Clone)]
pub struct Run {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

struct Artifacts {
    dir: PathBuf,
    outputs: Vec<OutputRecord>,
}

impl Artifacts {
    fn add(&mut self, rel: String, kind: &str, write: impl FnOnce(&Path) -> Result<usize, CliError>) -> Result<String, CliError> {
        let rows = write(&self.dir.join(&rel))?;
        self.outputs.push(OutputRecord { path: rel.clone(), kind: kind.into(), rows });
        Ok(rel)
    }
}

/// A previous run directory is replaced; anything else in the way is left
/// alone and reported.
fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        let empty = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?.next().is_none();
        if dir.join(MANIFEST_FILE).exists() {
            std::fs::remove_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        } else if !empty {
            return Err(CliError::Config(format!("{} exists and is not a run directory", dir.display())));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn initial(cfg: &RunConfig, init: &Initial, params: &ModelParams<f64>) -> Result<(XiGrid<f64>, LagrangianState<f64>), CliError> {
    let tol = cfg.grid.y0_tol;
    let stage = |e| CliError::stage("init", e);
    match (cfg.grid.xi_min, cfg.grid.xi_max) {
        (Some(a), Some(b)) => {
            let grid = XiGrid::new(a, b, cfg.grid.n).map_err(stage)?;
            let s = initial_state(init, &grid, tol).map_err(stage)?;
            Ok((grid, s))
        }
        (None, None) => {
            let (grid, map) = auto_grid(init, params.mu, cfg.grid.n).map_err(stage)?;
            let s = initial_state_from_map(&map, &grid, tol).map_err(stage)?;
            Ok((grid, s))
        }
        _ => Err(CliError::Config("grid.xi_min and grid.xi_max must be given together".into())),
    }
}

/// Common `x` grid for Eulerian snapshots: inside the span of `y` at every
/// stored time unless configured.
fn eulerian_grid(cfg: &RunConfig, traj: &Trajectory<f64>) -> Result<Vec<f64>, CliError> {
    let lo = traj.snapshots.iter().map(|s| s.y[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = traj.snapshots.iter().map(|s| s.y[s.len() - 1]).fold(f64::INFINITY, f64::min);
    let a = cfg.output.x_min.unwrap_or(lo);
    let b = cfg.output.x_max.unwrap_or(hi);
    let m = cfg.output.x_points;
    if !(a < b) || m < 2 {
        return Err(CliError::Config(format!("output x grid [{a}, {b}] with {m} points")));
    }
    Ok((0..m).map(|k| if k + 1 == m { b } else { a + (b - a) * k as f64 / (m - 1) as f64 }).collect())
}

pub fn run_experiment(config_path: &Path, command: Command, root: &Path) -> Result<Run, CliError> {
    let (cfg, text) = RunConfig::load(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let params = cfg.params()?;
    let ts = cfg.time_stepping()?;
    let (steps, dt) = ts.steps().map_err(|e| CliError::stage("validate", e))?;
    let profile = cfg.profile(base_dir)?;
    let init: Initial = profile.initial_data(cfg.grid.decay_tol).map_err(|e| CliError::stage("init", e))?;
    let (grid, state0) = initial(&cfg, &init, &params)?;
    if command == Command::Trace && cfg.characteristics.is_none() {
        return Err(CliError::Config("trace needs a [characteristics] table".into()));
    }
    if command == Command::Oracle && !cfg.oracle.as_ref().is_some_and(|o| o.enabled) {
        return Err(CliError::Config("oracle needs an enabled [oracle] table".into()));
    }

    let dir = root.join(cfg.run_name(config_path));
    prepare_dir(&dir)?;
    let mut art = Artifacts { dir: dir.clone(), outputs: Vec::new() };
    let eps_break = cfg.output.eps_break;

    log::info!("integrating {} steps of {dt:e} on {} nodes", steps, grid.len());
    let mut series = Vec::with_capacity(steps + 1);
    let mut breaking = Vec::with_capacity(steps + 1);
    let traj = integrate_with(&state0, &grid, &params, &ts, |s, rec| {
        let m = energy_measure_full(s, &grid, eps_break);
        series.push(SeriesRow::from(rec));
        breaking.push([s.t, rec.min_cos2, rec.report.breaking_fraction, m.ac_mass, m.atom_mass()]);
    })
    .map_err(|e| CliError::stage("integrate", e))?;

    art.add("series.csv".into(), "series", |p| io::write_series(p, &series))?;
    art.add("breaking.csv".into(), "breaking", |p| io::write_breaking(p, &breaking))?;

    let mut snapshots = Vec::new();
    let x_grid = if command == Command::Simulate && cfg.output.eulerian { Some(eulerian_grid(&cfg, &traj)?) } else { None };
    for (index, s) in traj.snapshots.iter().enumerate() {
        let m = energy_measure_full(s, &grid, eps_break);
        let mut rec =
            SnapshotRecord { index, t: s.t, lagrangian: None, eulerian: None, measure: None, ac_mass: m.ac_mass, atom_mass: m.atom_mass() };
        if command == Command::Simulate {
            if cfg.output.lagrangian {
                let rel = format!("snapshots/lagrangian_{index:04}.csv");
                rec.lagrangian = Some(art.add(rel, "lagrangian", |p| io::write_lagrangian(p, grid.values(), s))?);
            }
            if let Some(xs) = &x_grid {
                let field = to_eulerian(s, xs, eps_break).map_err(|e| CliError::stage("reconstruct", e))?;
                let rel = format!("snapshots/eulerian_{index:04}.csv");
                rec.eulerian = Some(art.add(rel, "eulerian", |p| io::write_eulerian(p, &field))?);
            }
            if cfg.output.measure {
                let rel = format!("snapshots/measure_{index:04}.csv");
                rec.measure = Some(art.add(rel, "measure", |p| io::write_measure(p, &m))?);
            }
        }
        snapshots.push(rec);
    }

    let mut traces = Vec::new();
    if let Some(ch) = cfg.characteristics.as_ref().filter(|_| command != Command::Oracle) {
        let stage = |e| CliError::stage("trace", e);
        let ctx = TraceContext::new(&traj, &params).map_err(stage)?;
        for (k, &y_start) in ch.y_starts.iter().enumerate() {
            let trace = ctx.trace_from_y(y_start, ch.picard_tol).map_err(stage)?;
            let laws = check_characteristic_laws(&trace, &ctx).map_err(stage)?;
            let flow = ctx.flow_curve(trace.beta[0]).map_err(stage)?;
            let dev = trace.y.iter().zip(&flow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let path = art.add(format!("traces/trace_{k:02}.csv"), "trace", |p| io::write_trace(p, &trace, &laws))?;
            traces.push(TraceRecord {
                path,
                y_start,
                beta0: trace.beta[0],
                iterations: trace.iterations,
                max_contraction_ratio: trace.max_ratio(),
                lipschitz: trace.lipschitz,
                max_flow_deviation: dev,
                max_residual_ode: laws.max_ode,
                max_residual_integral: laws.max_integral,
            });
        }
    }

    let mut oracle = None;
    if let Some(o) = cfg.oracle.as_ref().filter(|o| o.enabled && command != Command::Trace) {
        let l = init.truncation_halfwidth(params.mu);
        let ocfg = EulerianSolverConfig {
            x_min: o.x_min.unwrap_or(-l),
            x_max: o.x_max.unwrap_or(l),
            m: o.m,
            dt: o.dt.unwrap_or(cfg.time.dt),
            t_end: o.t_end.unwrap_or(cfg.time.t_end),
            snapshot_every: o.snapshot_every.unwrap_or(cfg.time.snapshot_every),
        };
        log::info!("oracle run on {} points", ocfg.m);
        let sol = solve_eulerian(&init, &params, &ocfg).map_err(|e| CliError::stage("oracle", e))?;
        let mut frames = Vec::new();
        for (i, (t, u)) in sol.frames.iter().enumerate() {
            let path = art.add(format!("oracle/u_{i:04}.csv"), "oracle", |p| io::write_xy(p, ["x", "u"], &sol.x, u))?;
            let linf = match traj.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-9 * (1.0 + t.abs())) {
                Some(s) => {
                    let (lo, hi) = (s.y[0], s.y[s.len() - 1]);
                    let (xs, us): (Vec<f64>, Vec<f64>) =
                        sol.x.iter().zip(u).filter(|(x, _)| **x >= lo && **x <= hi).map(|(x, u)| (*x, *u)).unzip();
                    let f = to_eulerian(s, &xs, eps_break).map_err(|e| CliError::stage("oracle", e))?;
                    Some(f.u.iter().zip(&us).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                }
                None => None,
            };
            frames.push(OracleFrame { t: *t, path, linf_vs_lagrangian: linf });
        }
        oracle = Some(OracleRecord { m: ocfg.m, dt: ocfg.dt, x_min: ocfg.x_min, x_max: ocfg.x_max, frames });
    }

    let raw = params.raw();
    let manifest = Manifest {
        tool: "gch".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        config_file: config_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        config_sha256: sha256_hex(text.as_bytes()),
        params: ParamsRecord {
            mu: raw.mu,
            k: raw.k,
            eta: raw.eta,
            s: raw.s,
            a: raw.a,
            b: raw.b,
            m: raw.m,
            allow_s_zero: cfg.model.allow_s_zero,
        },
        grid: GridRecord {
            nodes: grid.len(),
            h: grid.h(),
            xi_min: grid.xi_min(),
            xi_max: grid.xi_max(),
            split_cells: grid.split_cells().to_vec(),
        },
        time: TimeRecord { t_end: cfg.time.t_end, dt, steps, scheme: format!("{:?}", ts.scheme).to_lowercase() },
        e0: traj.e0,
        chart_offset: traj.chart_offset,
        summary: Summary {
            max_energy_drift_rel: traj.max_drift(),
            min_q: series.iter().map(|r| r.min_q).fold(f64::INFINITY, f64::min),
            max_q: series.iter().map(|r| r.max_q).fold(f64::NEG_INFINITY, f64::max),
            min_cos2: breaking.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min),
            max_breaking_fraction: series.iter().map(|r| r.breaking_fraction).fold(0.0, f64::max),
            max_atom_mass: breaking.iter().map(|r| r[4]).fold(0.0, f64::max),
            bound_u_ok: traj.series.iter().all(|r| r.report.bound_u_ok),
        },
        snapshots,
        traces,
        oracle,
        outputs: art.outputs,
        warnings: params.warnings.clone(),
    };
    manifest.write(&dir)?;
    Ok(Run { dir, manifest })
}
