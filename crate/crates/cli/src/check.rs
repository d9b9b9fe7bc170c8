//! `check <run-dir>`: reload stored Lagrangian snapshots and re-verify the
//! invariants against the stored time series.

use std::path::Path;

use gch_core::characteristics::build_chart;
use gch_core::diagnostics::{check_bounds, check_identities};
use gch_core::grid::XiGrid;
use gch_core::params::{ModelParams, RawParams};
use gch_core::reconstruction::total_energy;

use crate::error::CliError;
use crate::io;
use crate::manifest::Manifest;

/// Stored and recomputed energies may differ by this much (relative).
pub const STORED_ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotCheck {
    pub t: f64,
    pub energy: f64,
    pub drift: f64,
    pub residual_u_xi: f64,
    pub residual_y_xi: f64,
    pub min_q: f64,
    pub bound_u_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub snapshots: Vec<SnapshotCheck>,
    pub max_drift: f64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes diagnostics for every stored Lagrangian snapshot. `max_drift`
/// bounds the relative energy drift against the stored `E0`.
pub fn check_run(dir: &Path, max_drift: f64) -> Result<CheckReport, CliError> {
    let manifest = Manifest::read(dir)?;
    let p = manifest.params;
    let raw = RawParams { mu: p.mu, k: p.k, eta: p.eta, s: p.s, a: p.a, b: p.b, m: p.m };
    let params = ModelParams::<f64>::validate(&raw, p.allow_s_zero).map_err(|e| CliError::stage("validate", e))?;
    let series = io::read_series(&dir.join("series.csv"))?;
    let mut grid: Option<XiGrid<f64>> = None;
    let mut report = CheckReport { snapshots: Vec::new(), max_drift: 0.0, failures: Vec::new() };
    let fail = |msg: String| {
        log::warn!("{msg}");
        msg
    };
    for snap in &manifest.snapshots {
        let Some(rel) = &snap.lagrangian else { continue };
        let path = dir.join(rel);
        let (xi, state) = io::read_lagrangian(&path, snap.t)?;
        let g = match &grid {
            Some(g) if g.values() == &xi[..] => g.clone(),
            Some(_) => return Err(CliError::artifact(&path, "labels differ from the first snapshot")),
            None => {
                let g = XiGrid::from_nodes(xi, manifest.grid.h).map_err(|e| CliError::artifact(&path, e))?;
                if g.split_cells() != &manifest.grid.split_cells[..] {
                    return Err(CliError::artifact(&path, "doubled nodes differ from the manifest"));
                }
                grid.insert(g).clone()
            }
        };
        if let Err(e) = state.validate() {
            report.failures.push(fail(format!("t={}: {e}", snap.t)));
            continue;
        }
        if let Err(e) = build_chart(&state, &g, manifest.chart_offset) {
            report.failures.push(fail(format!("t={}: {e}", snap.t)));
        }
        let energy = total_energy(&state, &g, &params);
        let drift = if manifest.e0 > 0.0 { (energy - manifest.e0).abs() / manifest.e0 } else { energy.abs() };
        let (ru, ry) = check_identities(&state, &g);
        let bounds = check_bounds(&state, &params, manifest.e0);
        if !bounds.bound_u_ok {
            report.failures.push(fail(format!("t={}: sup u^2 = {} exceeds E0/sqrt(mu)", snap.t, bounds.sup_u_sq)));
        }
        if drift > max_drift {
            report.failures.push(fail(format!("t={}: energy drift {drift:e} > {max_drift:e}", snap.t)));
        }
        match series.iter().find(|r| r.t == snap.t) {
            Some(row) if (row.energy - energy).abs() <= STORED_ENERGY_TOL * energy.abs().max(1.0) => {}
            Some(row) => report.failures.push(fail(format!("t={}: stored E {} but snapshot gives {energy}", snap.t, row.energy))),
            None => report.failures.push(fail(format!("t={}: no series row", snap.t))),
        }
        report.max_drift = report.max_drift.max(drift);
        report.snapshots.push(SnapshotCheck {
            t: snap.t,
            energy,
            drift,
            residual_u_xi: ru,
            residual_y_xi: ry,
            min_q: bounds.min_q,
            bound_u_ok: bounds.bound_u_ok,
        });
    }
    if report.snapshots.is_empty() && report.failures.is_empty() {
        return Err(CliError::artifact(dir, "run has no Lagrangian snapshots to check"));
    }
    Ok(report)
}
