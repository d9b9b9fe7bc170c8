use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything a run wrote, with enough metadata to re-check it offline.
/// Contains no timestamps, so reruns produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_file: String,
    pub config_sha256: String,
    pub params: ParamsRecord,
    pub grid: GridRecord,
    pub time: TimeRecord,
    pub e0: f64,
    pub chart_offset: f64,
    pub snapshots: Vec<SnapshotRecord>,
    pub traces: Vec<TraceRecord>,
    pub oracle: Option<OracleRecord>,
    pub outputs: Vec<OutputRecord>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mu: f64,
    pub k: f64,
    pub eta: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub allow_s_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub nodes: usize,
    pub h: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub split_cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRecord {
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub index: usize,
    pub t: f64,
    pub lagrangian: Option<String>,
    pub eulerian: Option<String>,
    pub measure: Option<String>,
    pub ac_mass: f64,
    pub atom_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub path: String,
    pub y_start: f64,
    pub beta0: f64,
    pub iterations: usize,
    pub max_contraction_ratio: f64,
    pub lipschitz: f64,
    pub max_flow_deviation: f64,
    pub max_residual_ode: f64,
    pub max_residual_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub m: usize,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub frames: Vec<OracleFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFrame {
    pub t: f64,
    pub path: String,
    /// `L^inf` distance to the Lagrangian reconstruction, when a Lagrangian
    /// snapshot exists at the same time.
    pub linf_vs_lagrangian: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub kind: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_energy_drift_rel: f64,
    pub min_q: f64,
    pub max_q: f64,
    pub min_cos2: f64,
    pub max_breaking_fraction: f64,
    pub max_atom_mass: f64,
    pub bound_u_ok: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::artifact(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
