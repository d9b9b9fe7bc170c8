use gch_core::evolution::{integrate, TimeStepping};
use gch_core::grid::XiGrid;
use gch_core::init::{auto_grid, initial_state_from_map};
use gch_core::params::{ModelParams, Preset};
use gch_core::profiles::Profile;
use gch_core::reconstruction::{
    energy_measure, energy_measure_full, holder_half_quotient, l2_distance, l2_squared, to_eulerian, total_energy,
};
use gch_core::state::LagrangianState;

fn ch() -> ModelParams<f64> {
    ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap()
}

fn start(profile: Profile, n: usize) -> (XiGrid<f64>, LagrangianState<f64>) {
    let init = profile.initial_data::<f64>(1e-10).unwrap();
    let (grid, map) = auto_grid(&init, 1.0, n).unwrap();
    let s = initial_state_from_map(&map, &grid, 1e-13).unwrap();
    (grid, s)
}

fn gauss() -> Profile {
    Profile::Gaussian { amplitude: 1.0, width: 1.0, center: 0.0 }
}

fn x_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|k| a + (b - a) * k as f64 / (m - 1) as f64).collect()
}

#[test]
fn round_trip_at_start_is_second_order() {
    let xs = x_grid(-4.0, 4.0, 801);
    let err = |n| {
        let (_, s) = start(gauss(), n);
        let f = to_eulerian(&s, &xs, 1e-6).unwrap();
        f.x.iter().zip(&f.u).map(|(x, u)| (u - (-x * x).exp()).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (err(1024), err(2048));
    assert!(b < 1e-4, "{b}");
    assert!((3.0..=5.0).contains(&(a / b)), "{a} {b}");
}

#[test]
fn peakon_at_t1_against_closed_form() {
    let (grid, s) = start(Profile::Peakon { c: 1.0, center: 0.0 }, 2048);
    let p = ch();
    let e0 = total_energy(&s, &grid, &p);
    // E0 = ∫ 2 e^{-2|x|} dx = 2, up to the trapezoid error in the labels
    assert!((e0 - 2.0).abs() < grid.h().powi(2), "{e0}");
    let traj = integrate(&s, &grid, &p, &TimeStepping::new(1.0, 2e-3, 1000)).unwrap();
    let xs = x_grid(-8.0, 10.0, 3601);
    let f = to_eulerian(traj.last(), &xs, 1e-6).unwrap();
    let err = f.x.iter().zip(&f.u).map(|(x, u)| (u - (-(x - 1.0f64).abs()).exp()).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-2, "{err}");
}

#[test]
fn measure_at_start_has_density_ux_squared() {
    let (grid, s) = start(gauss(), 2048);
    let (a, b) = (-0.7, 1.3);
    let m = energy_measure(&s, &grid, a, b, 1e-6).unwrap();
    assert!(m.atoms.is_empty());
    // ∫_a^b 4x^2 e^{-2x^2} dx by Simpson
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |x: f64| 4.0 * x * x * (-2.0 * x * x).exp();
    let exact = (f(a) + f(b) + (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum::<f64>()) * h / 3.0;
    // node-based masses: endpoint error of one cell
    assert!((m.total - exact).abs() < 3.0 * grid.h(), "{} vs {exact}", m.total);
    for &(x, d) in &m.ac_density {
        assert!((d - f(x)).abs() < 1e-9);
    }
}

#[test]
fn energy_splits_into_l2_and_measure_through_a_collision() {
    let (grid, s) = start(Profile::AntipeakonPair { c: 1.0, separation: 2.0 }, 1024);
    let p = ch();
    let traj = integrate(&s, &grid, &p, &TimeStepping::new(2.5, 2e-3, 5)).unwrap();
    let mut peak_atoms = 0.0f64;
    for st in &traj.snapshots {
        let m = energy_measure_full(st, &grid, 1e-3);
        let split = l2_squared(st, &grid) + p.mu * m.total;
        assert!((split - total_energy(st, &grid, &p)).abs() < 1e-12);
        assert!((split - traj.e0).abs() < 1e-3 * traj.e0);
        peak_atoms = peak_atoms.max(m.atom_mass());
    }
    assert!(peak_atoms > 0.5 * traj.e0, "{peak_atoms}");
    assert!(energy_measure_full(traj.last(), &grid, 1e-3).atoms.is_empty());
}

#[test]
fn holder_quotient_is_refinement_stable() {
    let xs = x_grid(-6.0, 6.0, 1201);
    let q = |n| {
        let (grid, s) = start(Profile::AntipeakonPair { c: 1.0, separation: 2.0 }, n);
        let traj = integrate(&s, &grid, &ch(), &TimeStepping::new(1.7, 2e-3, 1000)).unwrap();
        holder_half_quotient(&to_eulerian(traj.last(), &xs, 1e-6).unwrap(), &[1, 2, 4, 8, 16, 64])
    };
    let (a, b) = (q(512), q(1024));
    assert!(a.is_finite() && b.is_finite());
    assert!((a / b - 1.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn time_lipschitz_in_l2() {
    let xs = x_grid(-6.0, 6.0, 1201);
    let constant = |n| {
        let (grid, s) = start(gauss(), n);
        let traj = integrate(&s, &grid, &ch(), &TimeStepping::new(1.0, 5e-3, 20)).unwrap();
        let fields: Vec<_> = traj.snapshots.iter().map(|st| to_eulerian(st, &xs, 1e-6).unwrap()).collect();
        fields.windows(2).map(|w| l2_distance(&w[0], &w[1]) / 0.1).fold(0.0, f64::max)
    };
    let (a, b) = (constant(512), constant(1024));
    assert!(a > 0.0 && (a / b - 1.0).abs() < 0.05, "{a} {b}");
}
