//! CSV artifacts. Floats are written with 17 significant digits, so every
//! array reads back bit for bit.

use std::fs::File;
use std::path::Path;

use gch_core::characteristics::{CharacteristicLaws, CharacteristicTrace};
use gch_core::evolution::SeriesRecord;
use gch_core::reconstruction::{EnergyMeasure, EulerianField};
use gch_core::state::LagrangianState;

use crate::error::CliError;

pub const LAGRANGIAN_HEADER: [&str; 5] = ["xi", "y", "u", "v", "q"];
pub const EULERIAN_HEADER: [&str; 4] = ["x", "u", "ux", "ux_defined"];
pub const SERIES_HEADER: [&str; 9] =
    ["t", "E", "E_drift_rel", "sup_u", "min_q", "max_q", "breaking_fraction", "residual_u_xi", "residual_y_xi"];
pub const BREAKING_HEADER: [&str; 5] = ["t", "min_cos2", "breaking_fraction", "ac_mass", "atom_mass"];
pub const TRACE_HEADER: [&str; 6] = ["t", "beta", "y", "u_along", "residual_ode", "residual_integral"];
pub const MEASURE_HEADER: [&str; 3] = ["kind", "x", "value"];

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    Ok(w)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::artifact(path, format!("{other:?}")),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<usize, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path, header)?;
    let mut count = 0;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(|e| csv_error(path, e))?;
        count += 1;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(count)
}

/// Reads a CSV with exactly `header` and parses each column as `f64`
/// (`true`/`false` read as 1/0).
fn read_columns(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let got: Vec<String> = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    if got != header {
        return Err(CliError::artifact(path, format!("expected header {header:?}, found {got:?}")));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (c, field) in rec.iter().enumerate() {
            let value = match field {
                "true" => 1.0,
                "false" => 0.0,
                f => f.trim().parse::<f64>().map_err(|e| CliError::artifact(path, format!("row {}: {e}", line + 2)))?,
            };
            cols[c].push(value);
        }
    }
    Ok(cols)
}

pub fn write_lagrangian(path: &Path, xi: &[f64], s: &LagrangianState<f64>) -> Result<usize, CliError> {
    let rows = (0..s.len()).map(|i| [xi[i], s.y[i], s.u[i], s.v[i], s.q[i]].map(fmt));
    write_rows(path, &LAGRANGIAN_HEADER, rows)
}

/// Labels and state of a Lagrangian snapshot; `t` is not stored in the file.
pub fn read_lagrangian(path: &Path, t: f64) -> Result<(Vec<f64>, LagrangianState<f64>), CliError> {
    let mut c = read_columns(path, &LAGRANGIAN_HEADER)?.into_iter();
    let mut next = || c.next().expect("five columns");
    let xi = next();
    let (y, u, v, q) = (next(), next(), next(), next());
    Ok((xi, LagrangianState { t, u, v, q, y }))
}

pub fn write_eulerian(path: &Path, f: &EulerianField<f64>) -> Result<usize, CliError> {
    let rows = (0..f.x.len()).map(|i| {
        let ux = if f.ux_defined[i] { fmt(f.ux[i]) } else { "nan".into() };
        [fmt(f.x[i]), fmt(f.u[i]), ux, f.ux_defined[i].to_string()]
    });
    write_rows(path, &EULERIAN_HEADER, rows)
}

pub fn read_eulerian(path: &Path) -> Result<EulerianField<f64>, CliError> {
    let mut c = read_columns(path, &EULERIAN_HEADER)?.into_iter();
    let (x, u, ux, defined) = (c.next().unwrap(), c.next().unwrap(), c.next().unwrap(), c.next().unwrap());
    let ux_defined: Vec<bool> = defined.iter().map(|&d| d == 1.0).collect();
    let ux = ux.iter().zip(&ux_defined).map(|(&v, &d)| if d { v } else { 0.0 }).collect();
    Ok(EulerianField { x, u, ux, ux_defined })
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: f64,
    pub drift: f64,
    pub sup_u: f64,
    pub min_q: f64,
    pub max_q: f64,
    pub breaking_fraction: f64,
    pub residual_u_xi: f64,
    pub residual_y_xi: f64,
}

impl From<&SeriesRecord<f64>> for SeriesRow {
    fn from(r: &SeriesRecord<f64>) -> Self {
        let d = &r.report;
        Self {
            t: d.t,
            energy: r.energy,
            drift: d.energy_drift_rel,
            sup_u: d.sup_u_sq.sqrt(),
            min_q: d.min_q,
            max_q: d.max_q,
            breaking_fraction: d.breaking_fraction,
            residual_u_xi: d.residual_u_xi,
            residual_y_xi: d.residual_y_xi,
        }
    }
}

pub fn write_series(path: &Path, rows: &[SeriesRow]) -> Result<usize, CliError> {
    write_rows(
        path,
        &SERIES_HEADER,
        rows.iter().map(|r| {
            [r.t, r.energy, r.drift, r.sup_u, r.min_q, r.max_q, r.breaking_fraction, r.residual_u_xi, r.residual_y_xi]
                .map(fmt)
        }),
    )
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>, CliError> {
    let c = read_columns(path, &SERIES_HEADER)?;
    Ok((0..c[0].len())
        .map(|i| SeriesRow {
            t: c[0][i],
            energy: c[1][i],
            drift: c[2][i],
            sup_u: c[3][i],
            min_q: c[4][i],
            max_q: c[5][i],
            breaking_fraction: c[6][i],
            residual_u_xi: c[7][i],
            residual_y_xi: c[8][i],
        })
        .collect())
}

/// `(t, min cos^2(v/2), breaking fraction, ac mass, atom mass)` per step.
pub fn write_breaking(path: &Path, rows: &[[f64; 5]]) -> Result<usize, CliError> {
    write_rows(path, &BREAKING_HEADER, rows.iter().map(|r| r.map(fmt)))
}

pub fn write_trace(path: &Path, trace: &CharacteristicTrace<f64>, laws: &CharacteristicLaws<f64>) -> Result<usize, CliError> {
    let rows = (0..trace.times.len()).map(|n| {
        [trace.times[n], trace.beta[n], trace.y[n], trace.u_along[n], laws.residual_ode[n], laws.residual_integral[n]]
            .map(fmt)
    });
    write_rows(path, &TRACE_HEADER, rows)
}

/// `ac` rows carry the density `u_x^2` at a node position, `atom` rows the
/// mass at the atom location.
pub fn write_measure(path: &Path, m: &EnergyMeasure<f64>) -> Result<usize, CliError> {
    let ac = m.ac_density.iter().map(|&(x, d)| ["ac".to_string(), fmt(x), fmt(d)]);
    let atoms = m.atoms.iter().map(|&(x, mass)| ["atom".to_string(), fmt(x), fmt(mass)]);
    write_rows(path, &MEASURE_HEADER, ac.chain(atoms))
}

pub fn write_xy(path: &Path, header: [&str; 2], x: &[f64], y: &[f64]) -> Result<usize, CliError> {
    write_rows(path, &header, x.iter().zip(y).map(|(&a, &b)| [fmt(a), fmt(b)]))
}

/// Two-column `x,u` table for tabulated initial data.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut c = read_columns(path, &["x", "u"])?.into_iter();
    Ok((c.next().unwrap(), c.next().unwrap()))
}
