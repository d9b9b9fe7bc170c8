use std::path::{Path, PathBuf};
use std::process::Command as Process;

use gch_cli::io::{read_eulerian, read_lagrangian, read_series, write_eulerian, write_lagrangian};
use gch_cli::{check_run, run_experiment, Command};
use gch_core::characteristics::build_chart;
use gch_core::evolution::{integrate, TimeStepping};
use gch_core::grid::XiGrid;
use gch_core::init::{auto_grid, initial_state_from_map};
use gch_core::params::{ModelParams, Preset};
use gch_core::profiles::Profile;
use gch_core::reconstruction::to_eulerian;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn gch() -> Process {
    Process::new(env!("CARGO_BIN_EXE_gch"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL_PEAKON: &str = r#"
[model]
preset = "CH"
[profile]
kind = "peakon"
c = 1.0
[grid]
n = 256
[time]
t_end = 0.5
dt = 0.01
snapshot_every = 10
[output]
x_points = 101
[characteristics]
y_starts = [-0.5, 1.0]
"#;

#[test]
fn zero_profile_run_is_all_zero() {
    let out = tempfile::tempdir().unwrap();
    let run = run_experiment(&configs().join("zero.cfg"), Command::Simulate, out.path()).unwrap();
    let rows = read_series(&run.dir.join("series.csv")).unwrap();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.energy == 0.0 && r.sup_u == 0.0 && r.breaking_fraction == 0.0));
    assert_eq!(run.manifest.e0, 0.0);
}

#[test]
fn s_zero_without_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bbm.cfg", &SMALL_PEAKON.replace("\"CH\"", "\"BBM_KdV\""));
    let out = gch().arg("simulate").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ZeroSWithoutOverride") && stderr.contains("validate"), "{stderr}");
    assert!(!dir.path().join("bbm").exists());
}

#[test]
fn unparsable_config_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "[model\npreset = CH");
    let out = gch().arg("simulate").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigParseError"));
}

#[test]
fn numerical_failure_exits_with_status_three() {
    // one huge step drives q negative
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_PEAKON.replace("dt = 0.01", "dt = 0.5").replace("c = 1.0", "c = 20.0");
    let cfg = write_config(dir.path(), "steep.cfg", &text);
    let out = gch().arg("simulate").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrate"));
}

#[test]
fn bundled_peakon_config_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = gch().arg("simulate").arg(configs().join("ch_peakon.cfg")).env("GCH_OUTPUT_ROOT", dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("ch_peakon");
    for f in ["manifest.json", "series.csv", "breaking.csv", "snapshots/lagrangian_0010.csv", "snapshots/eulerian_0010.csv", "traces/trace_02.csv"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let field = read_eulerian(&run.join("snapshots/eulerian_0010.csv")).unwrap();
    let err = field.x.iter().zip(&field.u).map(|(x, u)| (u - (-(x - 1.0f64).abs()).exp()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-2, "{err}");
    let check = gch().arg("check").arg(&run).output().unwrap();
    assert!(check.status.success(), "{}", String::from_utf8_lossy(&check.stderr));
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let p = ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap();
    let init = Profile::AntipeakonPair { c: 1.0, separation: 2.0 }.initial_data::<f64>(1e-10).unwrap();
    let (grid, map) = auto_grid(&init, 1.0, 300).unwrap();
    let s0 = initial_state_from_map(&map, &grid, 1e-13).unwrap();
    let traj = integrate(&s0, &grid, &p, &TimeStepping::new(1.8, 0.01, 1000)).unwrap();
    let state = traj.last();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.csv");
    write_lagrangian(&path, grid.values(), state).unwrap();
    let (xi, back) = read_lagrangian(&path, state.t).unwrap();
    assert_eq!(&back, state);
    assert_eq!(xi, grid.values());
    let xs: Vec<f64> = (0..201).map(|k| -5.0 + 0.05 * k as f64).collect();
    let field = to_eulerian(state, &xs, 1e-6).unwrap();
    assert!(field.ux_defined.iter().any(|d| !d) || field.ux_defined.iter().all(|&d| d));
    let epath = dir.path().join("e.csv");
    write_eulerian(&epath, &field).unwrap();
    let f2 = read_eulerian(&epath).unwrap();
    assert_eq!(f2.x, field.x);
    assert_eq!(f2.u, field.u);
    assert_eq!(f2.ux_defined, field.ux_defined);
    for i in 0..xs.len() {
        if field.ux_defined[i] {
            assert_eq!(f2.ux[i].to_bits(), field.ux[i].to_bits());
        }
    }
}

#[test]
fn stored_peakon_snapshot_gives_the_in_memory_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pk.cfg", SMALL_PEAKON);
    let run = run_experiment(&cfg, Command::Simulate, dir.path()).unwrap();
    let p = ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap();
    let init = Profile::Peakon { c: 1.0, center: 0.0 }.initial_data::<f64>(1e-10).unwrap();
    let (grid, map) = auto_grid(&init, 1.0, 256).unwrap();
    let s0 = initial_state_from_map(&map, &grid, 1e-13).unwrap();
    let traj = integrate(&s0, &grid, &p, &TimeStepping::new(0.5, 0.01, 10)).unwrap();
    let snap = &run.manifest.snapshots[3];
    let (xi, stored) = read_lagrangian(&run.dir.join(snap.lagrangian.as_ref().unwrap()), snap.t).unwrap();
    let g = XiGrid::from_nodes(xi, run.manifest.grid.h).unwrap();
    assert_eq!(g, grid);
    let a = build_chart(&stored, &g, run.manifest.chart_offset).unwrap();
    let b = build_chart(&traj.snapshots[3], &grid, traj.chart_offset).unwrap();
    assert_eq!(a, b);
}

#[test]
fn check_detects_a_tampered_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pk.cfg", SMALL_PEAKON);
    let run = run_experiment(&cfg, Command::Simulate, dir.path()).unwrap();
    let clean = check_run(&run.dir, 1e-2).unwrap();
    assert!(clean.passed(), "{:?}", clean.failures);
    let rel = run.manifest.snapshots[2].lagrangian.clone().unwrap();
    let path = run.dir.join(rel);
    let (xi, mut s) = read_lagrangian(&path, 0.0).unwrap();
    s.u[100] += 0.5;
    write_lagrangian(&path, &xi, &s).unwrap();
    let report = check_run(&run.dir, 1e-2).unwrap();
    assert!(!report.passed());
    let out = gch().arg("check").arg(&run.dir).arg("--max-drift").arg("1e-2").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trace_and_oracle_commands_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_PEAKON.replace("kind = \"peakon\"\nc = 1.0", "kind = \"gaussian\"\namplitude = 0.1\nwidth = 1.0")
        + "[oracle]\nm = 256\n";
    let cfg = write_config(dir.path(), "g.cfg", &text);
    let t = run_experiment(&cfg, Command::Trace, dir.path()).unwrap();
    assert_eq!(t.manifest.traces.len(), 2);
    assert!(t.manifest.oracle.is_none());
    assert!(t.manifest.traces.iter().all(|r| r.max_contraction_ratio <= 0.5));
    let o = run_experiment(&cfg, Command::Oracle, dir.path()).unwrap();
    let frames = &o.manifest.oracle.as_ref().unwrap().frames;
    assert_eq!(frames.len(), 6);
    assert!(frames.iter().all(|f| f.linf_vs_lagrangian.unwrap() < 1e-3));
    assert!(o.manifest.traces.is_empty());
}

#[test]
fn trace_without_starts_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_PEAKON.split("[characteristics]").next().unwrap().to_string();
    let cfg = write_config(dir.path(), "nt.cfg", &text);
    let err = run_experiment(&cfg, Command::Trace, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn tabulated_profile_is_read_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("x,u\n");
    for k in 0..=80 {
        let x = -4.0 + 0.1 * k as f64;
        table += &format!("{x},{}\n", 0.5 * (-x * x).exp());
    }
    std::fs::write(dir.path().join("u0.csv"), table).unwrap();
    let text = SMALL_PEAKON.replace("kind = \"peakon\"\nc = 1.0", "kind = \"tabulated\"\nfile = \"u0.csv\"");
    let cfg = write_config(dir.path(), "tab.cfg", &text.split("[characteristics]").next().unwrap());
    let run = run_experiment(&cfg, Command::Simulate, dir.path()).unwrap();
    assert!(run.manifest.summary.max_energy_drift_rel < 1e-3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pk.cfg", SMALL_PEAKON);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run_experiment(&cfg, Command::Simulate, &a).unwrap();
    let rb = run_experiment(&cfg, Command::Simulate, &b).unwrap();
    assert_eq!(ra.manifest, rb.manifest);
    for o in &ra.manifest.outputs {
        let x = std::fs::read(ra.dir.join(&o.path)).unwrap();
        let y = std::fs::read(rb.dir.join(&o.path)).unwrap();
        assert!(x == y, "{} differs", o.path);
    }
}
