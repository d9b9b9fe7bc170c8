//! Characteristics in the energy coordinate `beta = y + (energy to the left)`.
//!
//! In `beta` the characteristic equation `beta_t = G(t, beta)` has a
//! Lipschitz right-hand side even after breaking, so it can be solved by
//! Picard iteration. This module builds the chart `xi -> beta` for stored
//! states, traces characteristics through a [`Trajectory`], checks the laws
//! that hold along them, and integrates the whole system directly in `beta`
//! as an independent solver.

use crate::error::{Error, Result};
use crate::evolution::{rk_advance, v_rate_beta_form, TimeStepping, Trajectory};
use crate::grid::XiGrid;
use crate::kernel::{eval_kernel_corrected, exp_kernel_scan, fix_split_pairs, source_integrand, ArcLength};
use crate::params::ModelParams;
use crate::reconstruction::{reconstruct, EulerianField};
use crate::scalar::{locate_cell, max_abs, Real};
use crate::state::{cos2_half, sin2_half, LagrangianState};

/// Iteration cap for the Picard solver.
pub const PICARD_MAX_ITER: usize = 200;

/// Monotone map from node index to `beta` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaChart<T> {
    pub t: T,
    pub beta: Vec<T>,
    pub y: Vec<T>,
    pub u: Vec<T>,
}

/// `beta_i = y_i + ∫_{xi_min}^{xi_i} sin^2(v/2) q dxi + offset`. Doubled nodes
/// share one `beta`; anywhere else the chart must increase strictly.
pub fn build_chart<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, offset: T) -> Result<BetaChart<T>> {
    let density: Vec<T> = (0..state.len()).map(|i| sin2_half(state.v[i]) * state.q[i]).collect();
    let mass = ArcLength::from_density(T::zero(), &density, &grid.cell_widths()).0;
    let beta: Vec<T> = state.y.iter().zip(&mass).map(|(&y, &m)| y + m + offset).collect();
    for c in 0..beta.len().saturating_sub(1) {
        let ok = if grid.is_split_cell(c) { beta[c + 1] >= beta[c] } else { beta[c + 1] > beta[c] };
        if !ok {
            return Err(Error::NonMonotoneChart(c));
        }
    }
    Ok(BetaChart { t: state.t, beta, y: state.y.clone(), u: state.u.clone() })
}

impl<T: Real> BetaChart<T> {
    pub fn range(&self) -> (T, T) {
        (self.beta[0], self.beta[self.beta.len() - 1])
    }

    /// Cell and fraction of `beta` within it.
    pub fn locate(&self, beta: T) -> Result<(usize, T)> {
        let (lo, hi) = self.range();
        if !(beta >= lo && beta <= hi) {
            return Err(Error::BetaOutsideRange { beta: beta.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let c = locate_cell(&self.beta, beta);
        let db = self.beta[c + 1] - self.beta[c];
        let th = if db > T::zero() { ((beta - self.beta[c]) / db).max(T::zero()).min(T::one()) } else { T::zero() };
        Ok((c, th))
    }

    /// Linear interpolation of node values in `beta`.
    pub fn interpolate(&self, values: &[T], beta: T) -> Result<T> {
        let (c, th) = self.locate(beta)?;
        Ok(values[c] + th * (values[c + 1] - values[c]))
    }

    pub fn y_of_beta(&self, beta: T) -> Result<T> {
        self.interpolate(&self.y, beta)
    }

    pub fn u_of_beta(&self, beta: T) -> Result<T> {
        self.interpolate(&self.u, beta)
    }

    /// `beta` at the first node with `y >= y0`, interpolated.
    pub fn beta_of_y(&self, y0: T) -> Result<T> {
        let n = self.y.len();
        if !(y0 >= self.y[0] && y0 <= self.y[n - 1]) {
            return Err(Error::XOutsideRange { x: y0.as_f64(), lo: self.y[0].as_f64(), hi: self.y[n - 1].as_f64() });
        }
        let c = locate_cell(&self.y, y0);
        let dy = self.y[c + 1] - self.y[c];
        let th = if dy > T::zero() { (y0 - self.y[c]) / dy } else { T::zero() };
        Ok(self.beta[c] + th * (self.beta[c + 1] - self.beta[c]))
    }
}

pub fn y_of_beta<T: Real>(chart: &BetaChart<T>, beta: T) -> Result<T> {
    chart.y_of_beta(beta)
}

/// Everything needed to evaluate `G`, `P` and `P_x` at any `beta` for one
/// stored state.
#[derive(Debug, Clone)]
pub struct GField<T> {
    pub chart: BetaChart<T>,
    /// `∫_{xi_min}^{xi_i} [(s/mu) + (2/mu)(W - P)] (q/2) sin v dxi`.
    pub cumulative: Vec<T>,
    pub rate: Vec<T>,
    pub widths: Vec<T>,
    pub p: Vec<T>,
    pub px: Vec<T>,
    pub v: Vec<T>,
    drift: T,
}

impl<T: Real> GField<T> {
    pub fn new(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>, offset: T) -> Result<Self> {
        let chart = build_chart(state, grid, offset)?;
        let k = eval_kernel_corrected(state, grid, params)?;
        let two = T::lit(2.0);
        let rate: Vec<T> = (0..state.len())
            .map(|i| {
                let w = params.source_w(state.u[i]);
                (params.s / params.mu + two / params.mu * (w - k.p[i])) * state.q[i] / two * state.v[i].sin()
            })
            .collect();
        let widths = grid.cell_widths();
        let cumulative = ArcLength::from_density(T::zero(), &rate, &widths).0;
        Ok(Self { chart, cumulative, rate, widths, p: k.p, px: k.px, v: state.v.clone(), drift: params.eta / params.mu })
    }

    /// `G(t, beta)` with a partial trapezoid in the last cell.
    pub fn g_at(&self, beta: T) -> Result<T> {
        let (c, th) = self.chart.locate(beta)?;
        let f0 = self.rate[c];
        let f1 = f0 + th * (self.rate[c + 1] - f0);
        Ok(self.cumulative[c] + th * self.widths[c] * (f0 + f1) / T::lit(2.0) - self.drift)
    }

    pub fn px_at(&self, beta: T) -> Result<T> {
        self.chart.interpolate(&self.px, beta)
    }

    pub fn p_at(&self, beta: T) -> Result<T> {
        self.chart.interpolate(&self.p, beta)
    }

    /// Largest `|ΔG / Δbeta|` over cells: the empirical Lipschitz constant.
    pub fn lipschitz(&self) -> T {
        let b = &self.chart.beta;
        let mut worst = T::zero();
        for c in 0..b.len() - 1 {
            let db = b[c + 1] - b[c];
            if db > T::zero() {
                worst = worst.max(((self.cumulative[c + 1] - self.cumulative[c]) / db).abs());
            }
        }
        worst
    }
}

pub fn g_of_beta<T: Real>(
    state: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
    offset: T,
    beta: T,
) -> Result<T> {
    GField::new(state, grid, params, offset)?.g_at(beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTrace<T> {
    pub times: Vec<T>,
    pub beta: Vec<T>,
    pub y: Vec<T>,
    pub u_along: Vec<T>,
    pub iterations: usize,
    /// Successive ratios of Picard updates in the norm `sup e^{-2Ct} |.|`.
    pub contraction_ratios: Vec<T>,
    pub lipschitz: T,
}

impl<T: Real> CharacteristicTrace<T> {
    pub fn max_ratio(&self) -> T {
        self.contraction_ratios.iter().copied().fold(T::zero(), T::max)
    }
}

/// `G` fields for every snapshot of a trajectory.
#[derive(Debug, Clone)]
pub struct TraceContext<T> {
    pub times: Vec<T>,
    pub fields: Vec<GField<T>>,
    pub lipschitz: T,
    grid: XiGrid<T>,
    snapshots_y: Vec<Vec<T>>,
    params: ModelParams<T>,
}

impl<T: Real> TraceContext<T> {
    pub fn new(traj: &Trajectory<T>, params: &ModelParams<T>) -> Result<Self> {
        let fields = traj
            .snapshots
            .iter()
            .map(|s| GField::new(s, &traj.grid, params, traj.chart_offset))
            .collect::<Result<Vec<_>>>()?;
        let lipschitz = fields.iter().map(GField::lipschitz).fold(T::zero(), T::max);
        Ok(Self {
            times: traj.snapshot_times(),
            fields,
            lipschitz,
            grid: traj.grid.clone(),
            snapshots_y: traj.snapshots.iter().map(|s| s.y.clone()).collect(),
            params: params.clone(),
        })
    }

    /// Starting label `beta_0` of the characteristic through `y_start`.
    pub fn beta_of_start(&self, y_start: T) -> Result<T> {
        self.fields[0].chart.beta_of_y(y_start)
    }

    pub fn trace_from_y(&self, y_start: T, picard_tol: T) -> Result<CharacteristicTrace<T>> {
        self.trace_from_beta(self.beta_of_start(y_start)?, picard_tol)
    }

    /// Picard iteration `beta^{k+1}(t) = beta_0 + ∫_0^t G(s, beta^k(s)) ds`
    /// with the trapezoid rule on the snapshot times.
    pub fn trace_from_beta(&self, beta0: T, picard_tol: T) -> Result<CharacteristicTrace<T>> {
        let m = self.times.len();
        let c = self.lipschitz;
        let weight: Vec<T> = self.times.iter().map(|&t| (-T::lit(2.0) * c * t).exp()).collect();
        let mut beta = vec![beta0; m];
        let mut ratios = Vec::new();
        let mut last_weighted: Option<T> = None;
        let floor = T::lit(1e3) * T::epsilon() * (T::one() + beta0.abs());
        for it in 1..=PICARD_MAX_ITER {
            let g = self.fields.iter().zip(&beta).map(|(f, &b)| f.g_at(b)).collect::<Result<Vec<_>>>()?;
            let mut next = Vec::with_capacity(m);
            let mut acc = beta0;
            next.push(acc);
            for n in 1..m {
                acc += (self.times[n] - self.times[n - 1]) * (g[n - 1] + g[n]) / T::lit(2.0);
                next.push(acc);
            }
            let change = (0..m).map(|n| (next[n] - beta[n]).abs()).fold(T::zero(), T::max);
            let weighted = (0..m).map(|n| weight[n] * (next[n] - beta[n]).abs()).fold(T::zero(), T::max);
            if let Some(prev) = last_weighted {
                // ratios of roundoff-sized updates carry no information
                if prev > floor && weighted > floor {
                    ratios.push(weighted / prev);
                }
            }
            last_weighted = Some(weighted);
            beta = next;
            if change < picard_tol {
                return self.finish(beta, it, ratios);
            }
        }
        Err(Error::PicardDivergence { iterations: PICARD_MAX_ITER, last_change: last_weighted.unwrap_or(T::zero()).as_f64() })
    }

    fn finish(&self, beta: Vec<T>, iterations: usize, contraction_ratios: Vec<T>) -> Result<CharacteristicTrace<T>> {
        let mut y = Vec::with_capacity(beta.len());
        let mut u = Vec::with_capacity(beta.len());
        for (f, &b) in self.fields.iter().zip(&beta) {
            y.push(f.chart.y_of_beta(b)?);
            u.push(f.chart.u_of_beta(b)?);
        }
        Ok(CharacteristicTrace {
            times: self.times.clone(),
            beta,
            y,
            u_along: u,
            iterations,
            contraction_ratios,
            lipschitz: self.lipschitz,
        })
    }

    /// `y(t, xi*)` from the stored states, where `xi*` is the label with
    /// `beta(0, xi*) = beta0`.
    pub fn flow_curve(&self, beta0: T) -> Result<Vec<T>> {
        let (c, th) = self.fields[0].chart.locate(beta0)?;
        Ok(self.snapshots_y.iter().map(|y| y[c] + th * (y[c + 1] - y[c])).collect())
    }

    pub fn grid(&self) -> &XiGrid<T> {
        &self.grid
    }
}

pub fn trace_characteristic<T: Real>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    y_start: T,
    picard_tol: T,
) -> Result<CharacteristicTrace<T>> {
    TraceContext::new(traj, params)?.trace_from_y(y_start, picard_tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicLaws<T> {
    /// Per snapshot interval: `Δy/Δt - ((s/mu) ū - eta/mu)`; zero in row 0.
    pub residual_ode: Vec<T>,
    /// Per snapshot: `u(t) - u(0) + ∫_0^t P_x(s, y(s)) ds`.
    pub residual_integral: Vec<T>,
    pub max_ode: T,
    pub max_integral: T,
}

pub fn check_characteristic_laws<T: Real>(trace: &CharacteristicTrace<T>, ctx: &TraceContext<T>) -> Result<CharacteristicLaws<T>> {
    let p = &ctx.params;
    let m = trace.times.len();
    let px = ctx.fields.iter().zip(&trace.beta).map(|(f, &b)| f.px_at(b)).collect::<Result<Vec<_>>>()?;
    let mut ode = vec![T::zero(); m];
    let mut integral = vec![T::zero(); m];
    let mut acc = T::zero();
    for n in 1..m {
        let dt = trace.times[n] - trace.times[n - 1];
        let mean_u = (trace.u_along[n] + trace.u_along[n - 1]) / T::lit(2.0);
        ode[n] = (trace.y[n] - trace.y[n - 1]) / dt - p.transport_speed(mean_u);
        acc += dt * (px[n] + px[n - 1]) / T::lit(2.0);
        integral[n] = trace.u_along[n] - trace.u_along[0] + acc;
    }
    Ok(CharacteristicLaws { max_ode: max_abs(&ode), max_integral: max_abs(&integral), residual_ode: ode, residual_integral: integral })
}

/// Residuals of the linear system for `y_beta` and `u_beta` along a
/// characteristic, from two neighbouring traces:
///
/// ```text
/// D_t y_beta + G_beta y_beta = (s/mu) u_beta
/// D_t u_beta + G_beta u_beta = -P_xx y_beta,   P_xx = (P - W - (s/2) u_x^2) / mu
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCheck<T> {
    pub residual_y: T,
    pub residual_u: T,
}

pub fn check_linearized<T: Real>(ctx: &TraceContext<T>, beta_bar: T, delta: T, picard_tol: T) -> Result<LinearizedCheck<T>> {
    let p = &ctx.params;
    let a = ctx.trace_from_beta(beta_bar, picard_tol)?;
    let b = ctx.trace_from_beta(beta_bar + delta, picard_tol)?;
    let m = a.times.len();
    let mut yb = Vec::with_capacity(m);
    let mut ub = Vec::with_capacity(m);
    let mut gb = Vec::with_capacity(m);
    let mut pxx = Vec::with_capacity(m);
    let two = T::lit(2.0);
    for n in 0..m {
        let f = &ctx.fields[n];
        let db = b.beta[n] - a.beta[n];
        yb.push((b.y[n] - a.y[n]) / db);
        ub.push((b.u_along[n] - a.u_along[n]) / db);
        gb.push((f.g_at(b.beta[n])? - f.g_at(a.beta[n])?) / db);
        let mid = (a.beta[n] + b.beta[n]) / two;
        let v = f.chart.interpolate(&f.v, mid)?;
        let ux = v.sin() / (two * cos2_half(v));
        let u = f.chart.u_of_beta(mid)?;
        pxx.push((f.p_at(mid)? - p.source_w(u) - p.s / two * ux * ux) / p.mu);
    }
    let mut ry = T::zero();
    let mut ru = T::zero();
    for n in 1..m {
        let dt = a.times[n] - a.times[n - 1];
        let avg = |x: &[T]| (x[n] + x[n - 1]) / two;
        let g = avg(&gb);
        let (ybm, ubm) = (avg(&yb), avg(&ub));
        ry = ry.max(((yb[n] - yb[n - 1]) / dt + g * ybm - p.s / p.mu * ubm).abs());
        ru = ru.max(((ub[n] - ub[n - 1]) / dt + g * ubm + avg(&pxx) * ybm).abs());
    }
    Ok(LinearizedCheck { residual_y: ry, residual_u: ru })
}

/// Nodes of the `beta`-coordinate system at one time. Labels are the initial
/// values of `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaState<T> {
    pub t: T,
    pub beta: Vec<T>,
    pub y: Vec<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> BetaState<T> {
    pub fn to_eulerian(&self, x_grid: &[T], eps_break: T) -> Result<EulerianField<T>> {
        reconstruct(&self.y, &self.u, &self.v, x_grid, eps_break)
    }

    fn pack(&self) -> Vec<T> {
        [&self.beta, &self.y, &self.u, &self.v].into_iter().flatten().copied().collect()
    }

    fn unpack(x: &[T], t: T) -> Self {
        let n = x.len() / 4;
        Self { t, beta: x[..n].to_vec(), y: x[n..2 * n].to_vec(), u: x[2 * n..3 * n].to_vec(), v: x[3 * n..].to_vec() }
    }
}

/// Time derivative `(beta, y, u, v)_t` of the `beta` system. The kernel runs
/// over `beta` with density `cos^2(v/2) dbeta` in place of `cos^2(v/2) q dxi`.
pub fn beta_rhs<T: Real>(s: &BetaState<T>, splits: &[usize], params: &ModelParams<T>) -> Result<Vec<T>> {
    let n = s.beta.len();
    let widths: Vec<T> = s.beta.windows(2).map(|w| w[1] - w[0]).collect();
    let two = T::lit(2.0);
    let weight = |j: usize| {
        let l = if j > 0 { widths[j - 1] } else { T::zero() };
        let r = if j + 1 < n { widths[j] } else { T::zero() };
        (l + r) / two
    };
    let c2: Vec<T> = s.v.iter().map(|&v| cos2_half(v)).collect();
    let arc = ArcLength::from_density(s.y[0], &c2, &widths).0;
    let f: Vec<T> = (0..n).map(|j| weight(j) * source_integrand(params, s.u[j], s.v[j])).collect();
    let mut k = exp_kernel_scan(&arc, &f, params.sqrt_mu());
    fix_split_pairs(&mut k, &f, splits, params.mu);
    let rate: Vec<T> = (0..n)
        .map(|j| (params.s / params.mu + two / params.mu * (params.source_w(s.u[j]) - k.p[j])) / two * s.v[j].sin())
        .collect();
    let g = ArcLength::from_density(T::zero(), &rate, &widths).0;
    let mut out = Vec::with_capacity(4 * n);
    out.extend(g.iter().map(|&g| g - params.eta / params.mu));
    out.extend(s.u.iter().map(|&u| params.transport_speed(u)));
    out.extend(k.px.iter().map(|&px| -px));
    out.extend((0..n).map(|j| v_rate_beta_form(params, s.u[j], s.v[j], k.p[j])));
    if let Some(index) = out.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { field: "beta system", index: index % n });
    }
    Ok(out)
}

/// Integrates the `beta` system from the same initial data as the `xi`
/// system. At `t = 0` the chart is the identity, so the labels are the `xi`
/// grid and `(y, u, v)` are taken from `state0`.
pub fn evolve_beta_system<T: Real>(
    state0: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
    ts: &TimeStepping<T>,
) -> Result<Vec<BetaState<T>>> {
    let (steps, dt) = ts.steps()?;
    let every = ts.snapshot_every.max(1);
    let mut s = BetaState { t: T::zero(), beta: grid.values().to_vec(), y: state0.y.clone(), u: state0.u.clone(), v: state0.v.clone() };
    let splits = grid.split_cells().to_vec();
    let mut out = vec![s.clone()];
    for k in 1..=steps {
        let next = rk_advance(&s.pack(), dt, ts.scheme, |x| beta_rhs(&BetaState::unpack(x, s.t), &splits, params))?;
        s = BetaState::unpack(&next, T::of_usize(k) * dt);
        if let Some(c) = (0..s.beta.len() - 1).find(|&c| s.beta[c + 1] < s.beta[c]) {
            return Err(Error::NonMonotoneChart(c));
        }
        if k % every == 0 || k == steps {
            out.push(s.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Preset, RawParams};

    fn ch() -> ModelParams<f64> {
        ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap()
    }

    #[test]
    fn zero_state_chart_is_identity() {
        let grid = XiGrid::<f64>::new(-3.0, 3.0, 61).unwrap();
        let s = LagrangianState::zero(grid.values());
        let chart = build_chart(&s, &grid, 0.0).unwrap();
        for (b, x) in chart.beta.iter().zip(grid.values()) {
            assert!((b - x).abs() < 1e-15);
        }
        assert!((chart.y_of_beta(0.37).unwrap() - 0.37).abs() < 1e-15);
        assert!(matches!(chart.y_of_beta(4.0), Err(Error::BetaOutsideRange { .. })));
    }

    #[test]
    fn g_on_zero_state() {
        let grid = XiGrid::<f64>::new(-3.0, 3.0, 61).unwrap();
        let s = LagrangianState::zero(grid.values());
        assert_eq!(g_of_beta(&s, &grid, &ch(), 0.0, 0.5).unwrap(), 0.0);
        let raw = RawParams { eta: 0.4, mu: 2.0, ..Preset::CamassaHolm.raw(1.0) };
        let p = ModelParams::validate(&raw, false).unwrap();
        assert!((g_of_beta(&s, &grid, &p, 0.0, 0.5).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn plateau_in_y_is_flat_in_beta() {
        let grid = XiGrid::<f64>::new(0.0, 3.0, 31).unwrap();
        let mut s = LagrangianState::zero(grid.values());
        for i in 10..=20 {
            s.v[i] = -std::f64::consts::PI;
            s.y[i] = s.y[10];
        }
        for i in 21..31 {
            s.y[i] -= 1.0;
        }
        let chart = build_chart(&s, &grid, 0.0).unwrap();
        let (b0, b1) = (chart.beta[11], chart.beta[19]);
        assert!(b1 > b0);
        assert_eq!(chart.y_of_beta(b0).unwrap(), chart.y_of_beta(b1).unwrap());
    }

    #[test]
    fn decreasing_chart_is_rejected() {
        let grid = XiGrid::<f64>::new(0.0, 3.0, 31).unwrap();
        let mut s = LagrangianState::zero(grid.values());
        s.y[5] = 10.0;
        assert!(matches!(build_chart(&s, &grid, 0.0), Err(Error::NonMonotoneChart(5))));
    }
}
