//! Structural identities, a-priori bounds and breaking detection.

use crate::error::Result;
use crate::grid::XiGrid;
use crate::kernel::eval_kernel;
use crate::params::ModelParams;
use crate::reconstruction::total_energy;
use crate::scalar::Real;
use crate::state::LagrangianState;

/// Slack on `sup u^2 <= E0 / sqrt(mu)`, relative to `max(E0, 1)`.
pub const BOUND_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport<T> {
    pub t: T,
    pub energy_drift_rel: T,
    pub residual_u_xi: T,
    pub residual_y_xi: T,
    pub sup_u_sq: T,
    pub bound_u_ok: bool,
    pub min_q: T,
    pub max_q: T,
    pub breaking_fraction: T,
}

/// Second-order derivative on a uniform grid, one-sided at the ends.
pub fn derivative<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    assert!(n >= 3, "need at least three points");
    let two_h = T::lit(2.0) * h;
    let mut d = Vec::with_capacity(n);
    d.push((T::lit(-3.0) * f[0] + T::lit(4.0) * f[1] - f[2]) / two_h);
    for i in 1..n - 1 {
        d.push((f[i + 1] - f[i - 1]) / two_h);
    }
    d.push((T::lit(3.0) * f[n - 1] - T::lit(4.0) * f[n - 2] + f[n - 3]) / two_h);
    d
}

/// [`derivative`] applied on each segment of the grid separately, so that
/// doubled nodes see one-sided stencils.
pub fn derivative_on<T: Real>(grid: &XiGrid<T>, f: &[T]) -> Vec<T> {
    let h = grid.h();
    let mut d = Vec::with_capacity(f.len());
    for seg in grid.segments() {
        let part = &f[seg];
        match part.len() {
            0 => {}
            1 => d.push(T::zero()),
            2 => {
                let s = (part[1] - part[0]) / h;
                d.extend([s, s]);
            }
            _ => d.extend(derivative(part, h)),
        }
    }
    d
}

/// `(‖u_xi - (q/2) sin v‖_inf, ‖y_xi - q cos^2(v/2)‖_inf)`.
pub fn check_identities<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>) -> (T, T) {
    let du = derivative_on(grid, &state.u);
    let dy = derivative_on(grid, &state.y);
    let mut ru = T::zero();
    let mut ry = T::zero();
    for i in 0..state.len() {
        let q = state.q[i];
        ru = ru.max((du[i] - q / T::lit(2.0) * state.v[i].sin()).abs());
        ry = ry.max((dy[i] - q * state.cos2_half(i)).abs());
    }
    (ru, ry)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T> {
    pub sup_u_sq: T,
    pub bound_u_ok: bool,
    pub min_q: T,
    pub max_q: T,
}

pub fn check_bounds<T: Real>(state: &LagrangianState<T>, params: &ModelParams<T>, e0: T) -> Bounds<T> {
    let sup_u_sq = state.u.iter().map(|&u| u * u).fold(T::zero(), T::max);
    let tol = T::lit(BOUND_REL_TOL) * e0.max(T::one());
    Bounds {
        sup_u_sq,
        bound_u_ok: sup_u_sq <= e0 / params.sqrt_mu() + tol,
        min_q: state.q.iter().copied().fold(T::infinity(), T::min),
        max_q: state.q.iter().copied().fold(T::neg_infinity(), T::max),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breaking<T> {
    /// `q`-weighted share of nodes with `cos^2(v/2) < eps`.
    pub fraction: T,
    /// Maximal runs of flagged nodes as `[xi_start, xi_end]`.
    pub regions: Vec<(T, T)>,
}

pub fn detect_breaking<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, eps: T) -> Breaking<T> {
    let xi = grid.values();
    let mut flagged = T::zero();
    let mut all = T::zero();
    let mut regions = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..state.len() {
        let w = grid.weight(i) * state.q[i];
        all += w;
        if state.cos2_half(i) < eps {
            flagged += w;
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            regions.push((xi[s], xi[i - 1]));
        }
    }
    if let Some(s) = start {
        regions.push((xi[s], xi[state.len() - 1]));
    }
    let fraction = if all > T::zero() { flagged / all } else { T::zero() };
    Breaking { fraction, regions }
}

/// Largest `v_t` over nodes with `cos^2(v/2) < eps`, or `None` if there are
/// none. For `s > 0` the flow pushes `v` through `-pi` at a rate of at least
/// `s / (2 mu)`.
pub fn max_flagged_v_rate<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>, eps: T) -> Result<Option<T>> {
    let k = eval_kernel(state, grid, params)?;
    Ok((0..state.len())
        .filter(|&i| state.cos2_half(i) < eps)
        .map(|i| crate::evolution::v_rate(params, state.u[i], state.v[i], k.p[i]))
        .reduce(T::max))
}

pub fn report<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>, e0: T, eps: T) -> DiagnosticsReport<T> {
    let e = total_energy(state, grid, params);
    let drift = if e0 > T::zero() { (e - e0).abs() / e0 } else { (e - e0).abs() };
    let (residual_u_xi, residual_y_xi) = check_identities(state, grid);
    let b = check_bounds(state, params, e0);
    DiagnosticsReport {
        t: state.t,
        energy_drift_rel: drift,
        residual_u_xi,
        residual_y_xi,
        sup_u_sq: b.sup_u_sq,
        bound_u_ok: b.bound_u_ok,
        min_q: b.min_q,
        max_q: b.max_q,
        breaking_fraction: detect_breaking(state, grid, eps).fraction,
    }
}
