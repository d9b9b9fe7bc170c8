//! Back to Eulerian variables: `u(t, x)` via `x = y(t, xi)`, and the energy
//! measure split into an absolutely continuous part and atoms.

use crate::error::{Error, Result};
use crate::grid::XiGrid;
use crate::params::ModelParams;
use crate::scalar::{locate_cell, Real};
use crate::state::{cos2_half, sin2_half, LagrangianState};

/// Default `cos^2(v/2)` cut-off separating atoms from the smooth part.
pub const EPS_BREAK: f64 = 1e-6;

/// Relative size of a `y` increment treated as zero (a plateau).
pub const PLATEAU_REL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianField<T> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    /// Zero where undefined, see `ux_defined`.
    pub ux: Vec<T>,
    pub ux_defined: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMeasure<T> {
    /// `(x, u_x^2)` at nodes outside the breaking set.
    pub ac_density: Vec<(T, T)>,
    pub ac_mass: T,
    /// `(x, mass)` per maximal run of nearly broken nodes.
    pub atoms: Vec<(T, T)>,
    pub total: T,
}

impl<T: Real> EnergyMeasure<T> {
    pub fn atom_mass(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// `u_x = sin v / (1 + cos v)`, or `None` when `1 + cos v <= eps`.
pub fn ux_at<T: Real>(state: &LagrangianState<T>, i: usize, eps: T) -> Option<T> {
    ux_of_angle(state.v[i], eps)
}

#[inline]
pub fn ux_of_angle<T: Real>(v: T, eps: T) -> Option<T> {
    let one_plus_cos = T::lit(2.0) * cos2_half(v);
    (one_plus_cos > eps).then(|| v.sin() / one_plus_cos)
}

/// Interpolation linear in `y`. A plateau of `y` maps to a single `x`, where
/// the common value of `u` is taken and `u_x` is undefined.
pub fn to_eulerian<T: Real>(state: &LagrangianState<T>, x_grid: &[T], eps_break: T) -> Result<EulerianField<T>> {
    reconstruct(&state.y, &state.u, &state.v, x_grid, eps_break)
}

/// [`to_eulerian`] on bare node arrays.
pub fn reconstruct<T: Real>(y: &[T], u: &[T], v: &[T], x_grid: &[T], eps_break: T) -> Result<EulerianField<T>> {
    let n = y.len();
    if n < 2 || u.len() != n || v.len() != n {
        return Err(Error::InvalidState("need at least two nodes and matching lengths".into()));
    }
    let (lo, hi) = (y[0], y[n - 1]);
    let flat = T::lit(PLATEAU_REL) * (hi - lo).max(T::one());
    let ux_node: Vec<Option<T>> = v.iter().map(|&v| ux_of_angle(v, eps_break)).collect();
    let mut f = EulerianField {
        x: x_grid.to_vec(),
        u: Vec::with_capacity(x_grid.len()),
        ux: Vec::with_capacity(x_grid.len()),
        ux_defined: Vec::with_capacity(x_grid.len()),
    };
    for &x in x_grid {
        if !(x >= lo && x <= hi) {
            return Err(Error::XOutsideRange { x: x.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let i = locate_cell(y, x);
        let dy = y[i + 1] - y[i];
        let (ui, ux) = if dy <= flat {
            ((u[i] + u[i + 1]) / T::lit(2.0), None)
        } else {
            let th = ((x - y[i]) / dy).max(T::zero()).min(T::one());
            let ui = u[i] + th * (u[i + 1] - u[i]);
            let ux = match (ux_node[i], ux_node[i + 1]) {
                (Some(a), Some(b)) => Some(a + th * (b - a)),
                _ => None,
            };
            (ui, ux)
        };
        f.u.push(ui);
        f.ux.push(ux.unwrap_or(T::zero()));
        f.ux_defined.push(ux.is_some());
    }
    Ok(f)
}

/// `∫ (u^2 cos^2(v/2) + mu sin^2(v/2)) q dxi`, equal to `∫ u^2 + mu u_x^2 dx`.
pub fn total_energy<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>) -> T {
    (0..state.len())
        .map(|i| {
            let (u, v) = (state.u[i], state.v[i]);
            grid.weight(i) * (u * u * cos2_half(v) + params.mu * sin2_half(v)) * state.q[i]
        })
        .sum()
}

/// `∫ u^2 dx = ∫ u^2 cos^2(v/2) q dxi`.
pub fn l2_squared<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>) -> T {
    (0..state.len()).map(|i| grid.weight(i) * state.u[i] * state.u[i] * state.cos2_half(i) * state.q[i]).sum()
}

/// Energy measure of `[a, b]`: `∫_{y(xi) in [a,b]} sin^2(v/2) q dxi`.
///
/// Node-based: node `i` carries `w_i sin^2(v_i/2) q_i`. Runs of nodes with
/// `cos^2(v/2) < eps_break` form atoms at their mean `y`.
pub fn energy_measure<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, a: T, b: T, eps_break: T) -> Result<EnergyMeasure<T>> {
    if !(a < b) {
        return Err(Error::BadRange(format!("need a < b, got [{a}, {b}]")));
    }
    let mut m = EnergyMeasure { ac_density: Vec::new(), ac_mass: T::zero(), atoms: Vec::new(), total: T::zero() };
    let mut run: Option<(T, T, usize)> = None; // (mass, sum of y, count)
    let close = |run: &mut Option<(T, T, usize)>, atoms: &mut Vec<(T, T)>| {
        if let Some((mass, ys, c)) = run.take() {
            atoms.push((ys / T::of_usize(c), mass));
        }
    };
    for i in 0..state.len() {
        let y = state.y[i];
        let inside = y >= a && y <= b;
        let c2 = state.cos2_half(i);
        let broken = c2 < eps_break;
        if !(inside && broken) {
            close(&mut run, &mut m.atoms);
        }
        if !inside {
            continue;
        }
        let mass = grid.weight(i) * sin2_half(state.v[i]) * state.q[i];
        if broken {
            let r = run.get_or_insert((T::zero(), T::zero(), 0));
            r.0 += mass;
            r.1 += y;
            r.2 += 1;
        } else {
            let ux = state.v[i].sin() / (T::lit(2.0) * c2);
            m.ac_density.push((y, ux * ux));
            m.ac_mass += mass;
        }
    }
    close(&mut run, &mut m.atoms);
    m.total = m.ac_mass + m.atom_mass();
    Ok(m)
}

/// The measure of the whole line.
pub fn energy_measure_full<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, eps_break: T) -> EnergyMeasure<T> {
    let n = state.len();
    let pad = T::one();
    energy_measure(state, grid, state.y[0] - pad, state.y[n - 1] + pad, eps_break).expect("nonempty interval")
}

/// Largest `|u(x_j) - u(x_i)| / |x_j - x_i|^{1/2}` over pairs `(i, i + d)`
/// for every shift `d` in `shifts`.
pub fn holder_half_quotient<T: Real>(field: &EulerianField<T>, shifts: &[usize]) -> T {
    let mut worst = T::zero();
    for &d in shifts {
        for i in 0..field.x.len().saturating_sub(d) {
            let dx = field.x[i + d] - field.x[i];
            if dx > T::zero() {
                worst = worst.max((field.u[i + d] - field.u[i]).abs() / dx.sqrt());
            }
        }
    }
    worst
}

/// Trapezoid `L^2` distance between two fields on the same `x` grid.
pub fn l2_distance<T: Real>(a: &EulerianField<T>, b: &EulerianField<T>) -> T {
    let mut acc = T::zero();
    for i in 1..a.x.len() {
        let d0 = a.u[i - 1] - b.u[i - 1];
        let d1 = a.u[i] - b.u[i];
        acc += (a.x[i] - a.x[i - 1]) * (d0 * d0 + d1 * d1) / T::lit(2.0);
    }
    acc.sqrt()
}
