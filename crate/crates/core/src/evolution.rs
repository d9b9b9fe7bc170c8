//! Right-hand side of the semi-linear system and fixed-step time marching.

use crate::diagnostics::{self, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::grid::XiGrid;
use crate::kernel::{eval_kernel_corrected, KernelFields};
use crate::params::ModelParams;
use crate::reconstruction::total_energy;
use crate::scalar::Real;
use crate::state::{cos2_half, sin2_half, LagrangianState};

/// Cut-off for the breaking fraction recorded in the time series.
pub const SERIES_BREAK_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative<T> {
    pub du: Vec<T>,
    pub dv: Vec<T>,
    pub dq: Vec<T>,
    pub dy: Vec<T>,
}

/// `v_t` written with `1 + cos v`, which vanishes exactly where breaking
/// happens and leaves `v_t = -s/mu` there.
#[inline]
pub fn v_rate<T: Real>(params: &ModelParams<T>, u: T, v: T, p: T) -> T {
    let two = T::lit(2.0);
    (two * cos2_half(v) * (params.source_w(u) - p) - params.s * sin2_half(v)) / params.mu
}

/// The same rate in the form used by the `beta` system:
/// `(2/mu) cos^2(v/2) (W - P + s/2) - s/mu`.
#[inline]
pub fn v_rate_beta_form<T: Real>(params: &ModelParams<T>, u: T, v: T, p: T) -> T {
    let two = T::lit(2.0);
    two / params.mu * cos2_half(v) * (params.source_w(u) - p + params.s / two) - params.s / params.mu
}

/// Pointwise part of the right-hand side, given the nonlocal fields.
pub fn rhs_from_kernel<T: Real>(state: &LagrangianState<T>, params: &ModelParams<T>, k: &KernelFields<T>) -> StateDerivative<T> {
    let n = state.len();
    let half_s = params.s / T::lit(2.0);
    let mut d = StateDerivative { du: Vec::with_capacity(n), dv: Vec::with_capacity(n), dq: Vec::with_capacity(n), dy: Vec::with_capacity(n) };
    for i in 0..n {
        let (u, v, q, p) = (state.u[i], state.v[i], state.q[i], k.p[i]);
        d.du.push(-k.px[i]);
        d.dv.push(v_rate(params, u, v, p));
        d.dq.push((half_s + params.source_w(u) - p) * v.sin() * q / params.mu);
        d.dy.push(params.transport_speed(u));
    }
    d
}

pub fn rhs<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>) -> Result<StateDerivative<T>> {
    let k = eval_kernel_corrected(state, grid, params)?;
    let d = rhs_from_kernel(state, params, &k);
    for (field, xs) in [("du", &d.du), ("dv", &d.dv), ("dq", &d.dq), ("dy", &d.dy)] {
        if let Some(index) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { field, index });
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    /// Heun's method.
    Rk2,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Self::Rk4),
            "rk2" | "heun" => Ok(Self::Rk2),
            _ => Err(Error::BadRange(format!("unknown time scheme `{s}`"))),
        }
    }
}

/// One explicit step of an autonomous system on a flat vector.
pub(crate) fn rk_advance<T: Real>(
    x: &[T],
    dt: T,
    scheme: Scheme,
    mut f: impl FnMut(&[T]) -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    let axpy = |a: T, k: &[T]| -> Vec<T> { x.iter().zip(k).map(|(&xi, &ki)| xi + a * ki).collect() };
    let two = T::lit(2.0);
    match scheme {
        Scheme::Rk4 => {
            let k1 = f(x)?;
            let k2 = f(&axpy(dt / two, &k1))?;
            let k3 = f(&axpy(dt / two, &k2))?;
            let k4 = f(&axpy(dt, &k3))?;
            let sixth = dt / T::lit(6.0);
            Ok((0..x.len()).map(|i| x[i] + sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i])).collect())
        }
        Scheme::Rk2 => {
            let k1 = f(x)?;
            let k2 = f(&axpy(dt, &k1))?;
            Ok((0..x.len()).map(|i| x[i] + dt / two * (k1[i] + k2[i])).collect())
        }
    }
}

fn pack<T: Real>(s: &LagrangianState<T>) -> Vec<T> {
    [&s.u, &s.v, &s.q, &s.y].into_iter().flatten().copied().collect()
}

fn unpack<T: Real>(x: &[T], t: T) -> LagrangianState<T> {
    let n = x.len() / 4;
    LagrangianState { t, u: x[..n].to_vec(), v: x[n..2 * n].to_vec(), q: x[2 * n..3 * n].to_vec(), y: x[3 * n..].to_vec() }
}

pub fn step<T: Real>(
    state: &LagrangianState<T>,
    dt: T,
    params: &ModelParams<T>,
    grid: &XiGrid<T>,
    scheme: Scheme,
) -> Result<LagrangianState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::BadRange(format!("dt must be positive, got {dt}")));
    }
    let t = state.t;
    let next = rk_advance(&pack(state), dt, scheme, |x| {
        let d = rhs(&unpack(x, t), grid, params)?;
        Ok([d.du, d.dv, d.dq, d.dy].concat())
    })?;
    let out = unpack(&next, t + dt);
    out.check_finite()?;
    if let Some(index) = out.q.iter().position(|&q| q <= T::zero()) {
        return Err(Error::NonPositiveQ { index, t: out.t.as_f64() });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepping<T> {
    pub t_end: T,
    pub dt: T,
    /// Keep every `snapshot_every`-th state (the initial and final states are
    /// always kept).
    pub snapshot_every: usize,
    pub scheme: Scheme,
}

impl<T: Real> TimeStepping<T> {
    pub fn new(t_end: T, dt: T, snapshot_every: usize) -> Self {
        Self { t_end, dt, snapshot_every, scheme: Scheme::Rk4 }
    }

    /// Number of steps and the step actually used, so that the march lands
    /// on `t_end` exactly.
    pub fn steps(&self) -> Result<(usize, T)> {
        if !(self.t_end > T::zero()) || !(self.dt > T::zero()) {
            return Err(Error::BadRange(format!("need T > 0 and dt > 0, got T={} dt={}", self.t_end, self.dt)));
        }
        let n = (self.t_end / self.dt).round().max(T::one());
        let n = n.to_usize().ok_or_else(|| Error::BadRange("too many time steps".into()))?;
        Ok((n, self.t_end / T::of_usize(n)))
    }
}

/// Per-step record of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord<T> {
    pub energy: T,
    pub report: DiagnosticsReport<T>,
    pub min_cos2: T,
}

impl<T: Real> SeriesRecord<T> {
    pub fn t(&self) -> T {
        self.report.t
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub snapshots: Vec<LagrangianState<T>>,
    pub series: Vec<SeriesRecord<T>>,
    pub e0: T,
    /// `xi_min - y(0, xi_min)`: shifts the energy coordinate so that it is the
    /// label itself at `t = 0`.
    pub chart_offset: T,
    pub grid: XiGrid<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &LagrangianState<T> {
        self.snapshots.last().expect("trajectory has at least the initial state")
    }

    pub fn snapshot_times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn max_drift(&self) -> T {
        self.series.iter().map(|r| r.report.energy_drift_rel).fold(T::zero(), T::max)
    }
}

pub fn record<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>, e0: T) -> SeriesRecord<T> {
    let report = diagnostics::report(state, grid, params, e0, T::lit(SERIES_BREAK_EPS));
    let min_cos2 = (0..state.len()).map(|i| state.cos2_half(i)).fold(T::infinity(), T::min);
    SeriesRecord { energy: total_energy(state, grid, params), report, min_cos2 }
}

pub fn integrate<T: Real>(
    state0: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
    ts: &TimeStepping<T>,
) -> Result<Trajectory<T>> {
    integrate_with(state0, grid, params, ts, |_, _| {})
}

/// [`integrate`] with a callback on every accepted state (including the
/// initial one).
pub fn integrate_with<T: Real>(
    state0: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
    ts: &TimeStepping<T>,
    mut observe: impl FnMut(&LagrangianState<T>, &SeriesRecord<T>),
) -> Result<Trajectory<T>> {
    let (n, dt) = ts.steps()?;
    state0.validate()?;
    let every = ts.snapshot_every.max(1);
    let e0 = total_energy(state0, grid, params);
    let mut state = state0.clone();
    state.t = T::zero();
    let first = record(&state, grid, params, e0);
    observe(&state, &first);
    let mut traj = Trajectory {
        snapshots: vec![state.clone()],
        series: vec![first],
        e0,
        chart_offset: grid.xi_min() - state.y[0],
        grid: grid.clone(),
    };
    for k in 1..=n {
        let mut next = step(&state, dt, params, grid, ts.scheme)?;
        // times from the step count, not accumulated sums
        next.t = T::of_usize(k) * dt;
        let rec = record(&next, grid, params, e0);
        observe(&next, &rec);
        traj.series.push(rec);
        if k % every == 0 || k == n {
            traj.snapshots.push(next.clone());
        }
        state = next;
    }
    log::debug!("integrated {n} steps to t={}, max drift {:e}", state.t, traj.max_drift());
    Ok(traj)
}
