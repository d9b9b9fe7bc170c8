//! Nonlocal terms `P` and `P_x` in linear time.
//!
//! Both are convolutions with `exp(-|Y - Y'|/sqrt(mu))` where `Y` is the
//! arc-length `∫ cos^2(v/2) q dxi` (equal to `y`). Splitting the kernel at
//! the evaluation point turns each half into a first-order recurrence:
//!
//! ```text
//! L_i = e_i (L_{i-1} + f_{i-1}),   R_i = e_{i+1} (R_{i+1} + f_{i+1}),
//! e_i = exp(-(Y_i - Y_{i-1}) / sqrt(mu))
//! P_i   = (L_i + R_i + f_i) / (2 sqrt(mu))
//! P_x,i = (R_i - L_i) / (2 mu)
//! ```
//!
//! with `f_j = w_j g_j` the trapezoid-weighted source. Contributions beyond the
//! grid are zero. The scans run in a fixed order, so results are
//! bit-reproducible.

use crate::error::{Error, Result};
use crate::diagnostics::derivative_on;
use crate::grid::XiGrid;
use crate::params::ModelParams;
use crate::scalar::Real;
use crate::state::{cos2_half, sin2_half, LagrangianState};

/// Cumulative `∫ cos^2(v/2) q dxi`, anchored at `y` on the left end.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLength<T>(pub Vec<T>);

impl<T: Real> ArcLength<T> {
    /// Trapezoid cumulative sum of `density` over cells of width `widths[i]`
    /// (`widths.len() == density.len() - 1`).
    pub fn from_density(anchor: T, density: &[T], widths: &[T]) -> Self {
        debug_assert_eq!(widths.len() + 1, density.len());
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(density.len());
        let mut acc = anchor;
        out.push(acc);
        for (i, &w) in widths.iter().enumerate() {
            acc += half * w * (density[i] + density[i + 1]);
            out.push(acc);
        }
        Self(out)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }
}

/// `Y(xi) = y(xi_0) + ∫_{xi_0}^{xi} cos^2(v/2) q`.
pub fn arc_length<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>) -> ArcLength<T> {
    let density: Vec<T> = (0..state.len()).map(|i| state.cos2_half(i) * state.q[i]).collect();
    ArcLength::from_density(state.y[0], &density, &grid.cell_widths())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFields<T> {
    pub p: Vec<T>,
    pub px: Vec<T>,
}

/// Source integrand `[W(u) cos^2(v/2) + (s/2) sin^2(v/2)]` at one node, before
/// the `q dxi` (or `d beta`) measure.
#[inline]
pub fn source_integrand<T: Real>(params: &ModelParams<T>, u: T, v: T) -> T {
    params.source_w(u) * cos2_half(v) + params.s / T::lit(2.0) * sin2_half(v)
}

/// Two-sided exponential scans over nondecreasing positions `arc` with
/// already weighted sources `f` (`f_j = w_j g_j`).
pub fn exp_kernel_scan<T: Real>(arc: &[T], f: &[T], sqrt_mu: T) -> KernelFields<T> {
    let n = arc.len();
    debug_assert_eq!(f.len(), n);
    let mut decay = vec![T::one(); n];
    for i in 1..n {
        // ΔY = 0 on broken stretches gives a factor of exactly 1
        decay[i] = (-(arc[i] - arc[i - 1]) / sqrt_mu).exp();
    }
    let mut left = vec![T::zero(); n];
    for i in 1..n {
        left[i] = decay[i] * (left[i - 1] + f[i - 1]);
    }
    let mut right = vec![T::zero(); n];
    for i in (0..n.saturating_sub(1)).rev() {
        right[i] = decay[i + 1] * (right[i + 1] + f[i + 1]);
    }
    let two = T::lit(2.0);
    let p_scale = T::one() / (two * sqrt_mu);
    let px_scale = T::one() / (two * sqrt_mu * sqrt_mu);
    let mut p = Vec::with_capacity(n);
    let mut px = Vec::with_capacity(n);
    for i in 0..n {
        p.push((left[i] + right[i] + f[i]) * p_scale);
        px.push((right[i] - left[i]) * px_scale);
    }
    KernelFields { p, px }
}

/// At a doubled node the own sample is a one-sided limit: the left node of
/// the pair belongs to the left integral of `P_x`, the right one to the right.
pub fn fix_split_pairs<T: Real>(k: &mut KernelFields<T>, f: &[T], splits: &[usize], mu: T) {
    let scale = T::one() / (T::lit(2.0) * mu);
    for &c in splits {
        k.px[c] -= f[c] * scale;
        k.px[c + 1] += f[c + 1] * scale;
    }
}

/// Trapezoid-weighted source `w_j g_j q_j` on the `xi` grid.
pub fn weighted_source<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>) -> Vec<T> {
    (0..state.len())
        .map(|j| grid.weight(j) * source_integrand(params, state.u[j], state.v[j]) * state.q[j])
        .collect()
}

/// `P` and `P_x` together (one arc-length pass, one pair of scans).
pub fn eval_kernel<T: Real>(
    state: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
) -> Result<KernelFields<T>> {
    state.check_finite()?;
    let arc = arc_length(state, grid);
    let f = weighted_source(state, grid, params);
    let mut out = exp_kernel_scan(arc.values(), &f, params.sqrt_mu());
    fix_split_pairs(&mut out, &f, grid.split_cells(), params.mu);
    if let Some(index) = out.p.iter().chain(out.px.iter()).position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { field: "P", index: index % state.len() });
    }
    Ok(out)
}

/// Fourth-order corrections to the trapezoid values of `P` and `P_x`.
///
/// The integrands are smooth on each segment except for the kink of the
/// kernel at the evaluation point, so the leading Euler–Maclaurin terms
/// reduce to jumps of one-sided derivatives there and at every doubled node.
/// `g` is the unweighted source density, `d` the arc-length density and `dg`
/// its segment-wise derivative; `arc` the corrected positions.
#[allow(clippy::too_many_arguments)]
pub fn correct_kinks<T: Real>(
    k: &mut KernelFields<T>,
    arc: &[T],
    d: &[T],
    g: &[T],
    dg: &[T],
    splits: &[usize],
    h: T,
    sqrt_mu: T,
) {
    let n = g.len();
    let mu = sqrt_mu * sqrt_mu;
    let c = h * h / T::lit(12.0);
    let two = T::lit(2.0);
    let is_pair = |i: usize| splits.iter().any(|&s| i == s || i == s + 1);
    for i in 0..n {
        let (mut jp, mut jx) = (T::zero(), T::zero());
        if !is_pair(i) {
            jp += two * g[i] * d[i] / sqrt_mu;
            jx -= two * dg[i];
        }
        for &s in splits {
            let (a, b) = (s, s + 1);
            let flux = (g[a] * d[a] - g[b] * d[b]) / sqrt_mu;
            let slope = dg[a] - dg[b];
            if i == a || i == b {
                jp += slope + (g[a] * d[a] + g[b] * d[b]) / sqrt_mu;
                jx -= dg[a] + dg[b] + flux;
            } else {
                let kern = (-(arc[i] - arc[a]).abs() / sqrt_mu).exp();
                let side = if i > b { T::one() } else { -T::one() };
                jp += kern * (slope + side * flux);
                jx += kern * (-side * slope - flux);
            }
        }
        k.p[i] -= c * jp / (two * sqrt_mu);
        k.px[i] -= c * jx / (two * mu);
    }
}

/// Arc length with the end corrections of the cumulative trapezoid on each
/// segment; clamped to stay nondecreasing.
pub fn corrected_arc<T: Real>(arc: &mut [T], dd: &[T], splits: &[usize], h: T) {
    let n = arc.len();
    let c = h * h / T::lit(12.0);
    let mut closed = T::zero();
    let mut seg_start = 0;
    let mut next_split = splits.iter().peekable();
    for i in 0..n {
        arc[i] -= c * (closed + dd[i] - dd[seg_start]);
        if next_split.peek().is_some_and(|&&s| s == i) {
            next_split.next();
            closed += dd[i] - dd[seg_start];
            seg_start = i + 1;
        }
    }
    for i in 1..n {
        arc[i] = arc[i].max(arc[i - 1]);
    }
}

/// Kernel fields with the trapezoid errors of the kernel kink and of the
/// arc length removed; this is what the time stepper uses. Agrees with
/// [`eval_kernel`] to `O(h^2)`.
pub fn eval_kernel_corrected<T: Real>(
    state: &LagrangianState<T>,
    grid: &XiGrid<T>,
    params: &ModelParams<T>,
) -> Result<KernelFields<T>> {
    state.check_finite()?;
    let n = state.len();
    let h = grid.h();
    let sqrt_mu = params.sqrt_mu();
    let density: Vec<T> = (0..n).map(|i| state.cos2_half(i) * state.q[i]).collect();
    let g: Vec<T> = (0..n).map(|j| source_integrand(params, state.u[j], state.v[j]) * state.q[j]).collect();
    let f: Vec<T> = (0..n).map(|j| grid.weight(j) * g[j]).collect();
    let mut arc = arc_length(state, grid).0;
    let dd = derivative_on(grid, &density);
    corrected_arc(&mut arc, &dd, grid.split_cells(), h);
    let mut k = exp_kernel_scan(&arc, &f, sqrt_mu);
    fix_split_pairs(&mut k, &f, grid.split_cells(), params.mu);
    let dg = derivative_on(grid, &g);
    correct_kinks(&mut k, &arc, &density, &g, &dg, grid.split_cells(), h, sqrt_mu);
    if let Some(index) = k.p.iter().chain(k.px.iter()).position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { field: "P", index: index % n });
    }
    Ok(k)
}

pub fn eval_p<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>) -> Result<Vec<T>> {
    Ok(eval_kernel(state, grid, params)?.p)
}

pub fn eval_px<T: Real>(state: &LagrangianState<T>, grid: &XiGrid<T>, params: &ModelParams<T>) -> Result<Vec<T>> {
    Ok(eval_kernel(state, grid, params)?.px)
}
