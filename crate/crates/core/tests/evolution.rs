use approx::assert_relative_eq;
use gch_core::diagnostics::{check_bounds, check_identities, detect_breaking};
use gch_core::evolution::{integrate, step, Scheme, TimeStepping};
use gch_core::grid::XiGrid;
use gch_core::init::{auto_grid, initial_state_from_map, InitialData};
use gch_core::params::{ModelParams, Preset};
use gch_core::profiles::Profile;
use gch_core::reconstruction::total_energy;
use gch_core::state::LagrangianState;

fn ch() -> ModelParams<f64> {
    ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap()
}

fn gaussian(n: usize) -> (XiGrid<f64>, LagrangianState<f64>) {
    let init = Profile::Gaussian { amplitude: 1.0, width: 1.0, center: 0.0 }.initial_data::<f64>(1e-10).unwrap();
    let (grid, map) = auto_grid(&init, 1.0, n).unwrap();
    (grid.clone(), initial_state_from_map(&map, &grid, 1e-13).unwrap())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn initial_labels_match_independent_quadrature() {
    // xi = y + ∫_0^y u0'(x)^2 dx for u0 = exp(-x^2); the label table is a
    // trapezoid sum on ~3e-5 cells, good to about 1e-10
    let (grid, s) = gaussian(512);
    let du = |x: f64| -2.0 * x * (-x * x).exp();
    for i in (0..s.len()).step_by(37) {
        let y = s.y[i];
        let want = y + simpson(|x| du(x).powi(2), 0.0, y, 4000);
        assert!((grid.values()[i] - want).abs() < 1e-9, "{i}: {} vs {want}", grid.values()[i]);
        assert!((s.u[i] - (-y * y).exp()).abs() < 1e-14);
        assert_relative_eq!(s.q[i], 1.0, epsilon = 1e-14);
    }
}

#[test]
fn initial_energy_matches_x_space_integral() {
    let (grid, s) = gaussian(2048);
    let e = total_energy(&s, &grid, &ch());
    // ∫ e^{-2x^2} + 4x^2 e^{-2x^2} dx = sqrt(pi/2) (1 + 1)
    let exact = 2.0 * (std::f64::consts::PI / 2.0).sqrt();
    assert!((e - exact).abs() / exact < 1e-8, "{e} vs {exact}");
}

#[test]
fn identity_residuals_are_second_order_at_start() {
    let (ga, a) = gaussian(1024);
    let (gb, b) = gaussian(2048);
    let (ua, ya) = check_identities(&a, &ga);
    let (ub, yb) = check_identities(&b, &gb);
    for r in [ua / ub, ya / yb] {
        assert!((3.0..=5.0).contains(&r), "{r}");
    }
}

#[test]
fn identity_residuals_stay_second_order_along_the_flow() {
    let run = |n| {
        let (g, s) = gaussian(n);
        let traj = integrate(&s, &g, &ch(), &TimeStepping::new(0.5, 5e-3, 1000)).unwrap();
        check_identities(traj.last(), &g)
    };
    let (a, b) = (run(1024), run(2048));
    assert!((3.0..=5.0).contains(&(a.0 / b.0)), "{a:?} {b:?}");
    assert!((3.0..=5.0).contains(&(a.1 / b.1)), "{a:?} {b:?}");
}

fn final_state(dt: f64, scheme: Scheme) -> LagrangianState<f64> {
    let (g, s) = gaussian(256);
    let mut ts = TimeStepping::new(0.8, dt, 1000);
    ts.scheme = scheme;
    integrate(&s, &g, &ch(), &ts).unwrap().last().clone()
}

fn sup_diff(a: &LagrangianState<f64>, b: &LagrangianState<f64>) -> f64 {
    a.u.iter().zip(&b.u).chain(a.v.iter().zip(&b.v)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn richardson_ratios_show_time_order() {
    for (scheme, lo, hi) in [(Scheme::Rk4, 13.0, 19.0), (Scheme::Rk2, 3.5, 4.5)] {
        let s: Vec<_> = [0.04, 0.02, 0.01].iter().map(|&dt| final_state(dt, scheme)).collect();
        let ratio = sup_diff(&s[0], &s[1]) / sup_diff(&s[1], &s[2]);
        assert!((lo..=hi).contains(&ratio), "{scheme:?}: {ratio}");
    }
}

#[test]
fn energy_and_bounds_along_a_short_run() {
    let (g, s) = gaussian(1024);
    let p = ch();
    let traj = integrate(&s, &g, &p, &TimeStepping::new(1.0, 1e-2, 10)).unwrap();
    assert!(traj.max_drift() < 1e-6, "{}", traj.max_drift());
    for state in &traj.snapshots {
        let b = check_bounds(state, &p, traj.e0);
        assert!(b.bound_u_ok);
        assert!(b.min_q > 0.0);
    }
    assert_eq!(traj.series.len(), 101);
    assert_eq!(traj.snapshots.len(), 11);
}

#[test]
fn zero_state_is_a_fixed_point() {
    let grid = XiGrid::new(-5.0, 5.0, 64).unwrap();
    let init = InitialData::<f64>::zero();
    let s = gch_core::init::initial_state(&init, &grid, 1e-12).unwrap();
    let traj = integrate(&s, &grid, &ch(), &TimeStepping::new(1.0, 0.1, 1)).unwrap();
    assert_eq!(traj.last().u, s.u);
    assert_eq!(traj.last().y, s.y);
    assert_eq!(traj.e0, 0.0);
}

#[test]
fn step_rejects_bad_input() {
    let (g, s) = gaussian(64);
    assert!(step(&s, 0.0, &ch(), &g, Scheme::Rk4).is_err());
    let mut bad = s.clone();
    bad.q[5] = -1.0;
    assert!(step(&bad, 0.01, &ch(), &g, Scheme::Rk4).is_err());
}

#[test]
fn antipeakon_collision_is_flagged_and_passes() {
    let init = Profile::AntipeakonPair { c: 1.0, separation: 2.0 }.initial_data::<f64>(1e-10).unwrap();
    let (g, map) = auto_grid(&init, 1.0, 1024).unwrap();
    let s = initial_state_from_map(&map, &g, 1e-13).unwrap();
    let traj = integrate(&s, &g, &ch(), &TimeStepping::new(2.5, 2e-3, 50)).unwrap();
    let min_cos2 = traj.series.iter().map(|r| r.min_cos2).fold(1.0, f64::min);
    assert!(min_cos2 < 1e-2, "{min_cos2}");
    let flagged: Vec<f64> = traj.series.iter().filter(|r| r.report.breaking_fraction > 0.0).map(|r| r.t()).collect();
    assert!(!flagged.is_empty());
    assert!(flagged.last().unwrap() - flagged[0] < 0.4);
    assert_eq!(detect_breaking(traj.last(), &g, 1e-3).fraction, 0.0);
    assert!(traj.max_drift() < 1e-3);
}
