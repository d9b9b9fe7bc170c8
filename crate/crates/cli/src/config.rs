//! Run configuration, read from a TOML file.
//!
//! ```toml
//! [model]
//! preset = "CH"            # or give mu, k, eta, s, a, b, m explicitly
//!
//! [profile]
//! kind = "peakon"          # zero | gaussian | peakon | antipeakon_pair | tabulated
//! c = 1.0
//!
//! [grid]
//! n = 4096
//!
//! [time]
//! t_end = 1.0
//! dt = 1e-3
//! snapshot_every = 100
//! ```
//!
//! Optional tables: `[output]`, `[characteristics]`, `[oracle]`. See the
//! README for every key.

use std::path::{Path, PathBuf};

use gch_core::evolution::{Scheme, TimeStepping};
use gch_core::params::{preset, ModelParams, RawParams};
use gch_core::profiles::{Profile, DEFAULT_DECAY_TOL};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub characteristics: Option<CharacteristicsConfig>,
    pub oracle: Option<OracleConfig>,
}

/// A preset name, explicit coefficients, or a preset with some of them
/// overridden.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<String>,
    /// `mu` for presets that leave it free.
    pub mu_choice: Option<f64>,
    pub mu: Option<f64>,
    pub k: Option<f64>,
    pub eta: Option<f64>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub m: Option<f64>,
    #[serde(default)]
    pub allow_s_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Zero,
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    Peakon {
        c: f64,
        #[serde(default)]
        center: f64,
    },
    AntipeakonPair {
        c: f64,
        separation: f64,
    },
    /// CSV with columns `x,u`, relative to the config file.
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Explicit label range; both or neither. Default: the labels of
    /// `[-L, L]` with doubled nodes at kinks.
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub decay_tol: f64,
    pub y0_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 1024, xi_min: None, xi_max: None, decay_tol: DEFAULT_DECAY_TOL, y0_tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

fn default_snapshot_every() -> usize {
    100
}

fn default_scheme() -> String {
    "rk4".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Run directory name under the output root; defaults to the config
    /// file stem.
    pub name: Option<String>,
    pub lagrangian: bool,
    pub eulerian: bool,
    pub measure: bool,
    /// Points of the common `x` grid for Eulerian snapshots.
    pub x_points: usize,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    /// `cos^2(v/2)` threshold below which `u_x` is masked and energy is
    /// reported as an atom.
    pub eps_break: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            name: None,
            lagrangian: true,
            eulerian: true,
            measure: true,
            x_points: 2001,
            x_min: None,
            x_max: None,
            eps_break: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicsConfig {
    pub y_starts: Vec<f64>,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
}

fn default_picard_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub m: usize,
    /// Defaults to `time.dt`, `time.t_end`, `time.snapshot_every`.
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_every: Option<usize>,
    /// Defaults to `[-L, L]`.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn raw_params(&self) -> Result<RawParams, CliError> {
        let m = &self.model;
        let base = match &m.preset {
            Some(name) => Some(preset(name, m.mu_choice.unwrap_or(1.0)).map_err(|e| CliError::stage("validate", e))?),
            None => None,
        };
        let pick = |name: &str, value: Option<f64>, from: Option<f64>| {
            value.or(from).ok_or_else(|| CliError::Config(format!("model.{name} missing and no preset given")))
        };
        Ok(RawParams {
            mu: pick("mu", m.mu, base.map(|b| b.mu))?,
            k: pick("k", m.k, base.map(|b| b.k))?,
            eta: pick("eta", m.eta, base.map(|b| b.eta))?,
            s: pick("s", m.s, base.map(|b| b.s))?,
            a: pick("a", m.a, base.map(|b| b.a))?,
            b: pick("b", m.b, base.map(|b| b.b))?,
            m: pick("m", m.m, base.map(|b| b.m))?,
        })
    }

    pub fn params(&self) -> Result<ModelParams<f64>, CliError> {
        ModelParams::validate(&self.raw_params()?, self.model.allow_s_zero).map_err(|e| CliError::stage("validate", e))
    }

    /// The profile, with tabulated data read relative to `base_dir`.
    pub fn profile(&self, base_dir: &Path) -> Result<Profile, CliError> {
        Ok(match &self.profile {
            ProfileConfig::Zero => Profile::Zero,
            &ProfileConfig::Gaussian { amplitude, width, center } => Profile::Gaussian { amplitude, width, center },
            &ProfileConfig::Peakon { c, center } => Profile::Peakon { c, center },
            &ProfileConfig::AntipeakonPair { c, separation } => Profile::AntipeakonPair { c, separation },
            ProfileConfig::Tabulated { file } => {
                let path = base_dir.join(file);
                let (x, u) = crate::io::read_table(&path)?;
                Profile::Tabulated { x, u }
            }
        })
    }

    pub fn time_stepping(&self) -> Result<TimeStepping<f64>, CliError> {
        let scheme: Scheme = self.time.scheme.parse().map_err(|e| CliError::stage("validate", e))?;
        let mut ts = TimeStepping::new(self.time.t_end, self.time.dt, self.time.snapshot_every);
        ts.scheme = scheme;
        ts.steps().map_err(|e| CliError::stage("validate", e))?;
        Ok(ts)
    }

    /// Directory name of the run when none is configured.
    pub fn run_name(&self, config_path: &Path) -> String {
        self.output.name.clone().unwrap_or_else(|| {
            config_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
        })
    }
}
