//! Initial change of variables from `u0 ∈ H^1` to the Lagrangian state.
//!
//! Labels are defined through `∫_0^{y0(xi)} (1 + u0x^2) dx = xi`, so that
//! `q(0, xi) = 1`. The anchor `y0(0) = 0` is fixed; any other choice is a
//! translation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::XiGrid;
use crate::scalar::Real;
use crate::state::LagrangianState;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Total number of quadrature cells used for the `y0` table.
const TABLE_CELLS: usize = 1 << 20;

/// Initial profile `u0` with optional analytic derivative.
#[derive(Clone)]
pub struct InitialData<T> {
    u0: ScalarFn<T>,
    u0x: Option<ScalarFn<T>>,
    /// Beyond this `|x|`, `|u0|` and `|u0x|` are below the decay tolerance.
    pub decay_halfwidth: T,
    /// Points where `u0x` jumps (peakon crests, table nodes). Quadrature
    /// places nodes on them.
    pub kinks: Vec<T>,
}

impl<T: Real> std::fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData")
            .field("analytic_derivative", &self.u0x.is_some())
            .field("decay_halfwidth", &self.decay_halfwidth)
            .field("kinks", &self.kinks)
            .finish()
    }
}

impl<T: Real> InitialData<T> {
    pub fn new(u0: impl Fn(T) -> T + Send + Sync + 'static, decay_halfwidth: T) -> Self {
        Self { u0: Arc::new(u0), u0x: None, decay_halfwidth, kinks: Vec::new() }
    }

    pub fn with_derivative(mut self, u0x: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.u0x = Some(Arc::new(u0x));
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<T>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn zero() -> Self {
        Self::new(|_| T::zero(), T::zero()).with_derivative(|_| T::zero())
    }

    #[inline]
    pub fn u0(&self, x: T) -> T {
        (self.u0)(x)
    }

    /// Analytic derivative, or a central difference with step
    /// `1e-6 (1 + |x|)` (widened to `eps^(1/3)` for low precision types).
    pub fn u0x(&self, x: T) -> T {
        match &self.u0x {
            Some(d) => d(x),
            None => {
                let base = T::lit(1e-6).max(T::epsilon().cbrt());
                let h = base * (T::one() + x.abs());
                (self.u0(x + h) - self.u0(x - h)) / (h + h)
            }
        }
    }

    /// Half-width `L` of the physical interval covered by the grid:
    /// decay half-width plus ten kernel lengths `sqrt(mu)`.
    pub fn truncation_halfwidth(&self, mu: T) -> T {
        self.decay_halfwidth + T::lit(10.0) * mu.sqrt()
    }

    /// `∫ (u0^2 + mu u0x^2) dx` over `[-l, l]` by composite Simpson on `cells`
    /// cells, splitting at kinks. Used to check H^1 membership and as the
    /// x-side energy reference.
    pub fn h1_energy(&self, mu: T, l: T, cells: usize) -> Result<T> {
        let f = |x: T| {
            let (u, ux) = (self.u0(x), self.u0x(x));
            u * u + mu * ux * ux
        };
        let value = piecewise_simpson(&f, &self.breakpoints(l), l, cells);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::QuadratureFailure("H^1 energy of u0 is not finite".into()))
        }
    }

    fn breakpoints(&self, l: T) -> Vec<T> {
        let mut pts = vec![-l, T::zero(), l];
        pts.extend(self.kinks.iter().copied().filter(|k| k.abs() < l));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (T::one() + b.abs()));
        pts
    }
}

/// Composite Simpson on each piece of `breaks`, evaluating one-sided at the
/// piece ends. Total cell budget is spread proportionally to piece length.
fn piecewise_simpson<T: Real>(f: &dyn Fn(T) -> T, breaks: &[T], l: T, cells: usize) -> T {
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        let mut n = ((len / (l + l)).as_f64() * cells as f64).ceil().max(2.0) as usize;
        if n % 2 == 1 {
            n += 1;
        }
        let h = len / T::of_usize(n);
        let mut acc = f(inward(a, b)) + f(inward(b, a));
        for i in 1..n {
            let x = a + T::of_usize(i) * h;
            acc += if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) } * f(x);
        }
        total += acc * h / T::lit(3.0);
    }
    total
}

/// `a` nudged towards `b` so that one-sided limits are sampled at kinks.
#[inline]
fn inward<T: Real>(a: T, b: T) -> T {
    let nudge = T::epsilon().sqrt() * T::lit(1e-4) * (T::one() + a.abs());
    if b > a {
        a + nudge
    } else {
        a - nudge
    }
}

/// Cumulative table of `xi(y) = ∫_0^y (1 + u0x^2) dx` on `[-l, l]`, with
/// linear extension (integrand 1) outside. Inverting it gives `y0`.
#[derive(Clone)]
pub struct Y0Map<T> {
    x: Vec<T>,
    cum: Vec<T>,
    // integrand at the ends of each cell, seen from inside the cell
    f_left: Vec<T>,
    f_right: Vec<T>,
    data: InitialData<T>,
}

impl<T: Real> std::fmt::Debug for Y0Map<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Y0Map").field("cells", &(self.x.len() - 1)).field("xi_span", &self.xi_span()).finish()
    }
}

impl<T: Real> Y0Map<T> {
    /// Builds the table with composite trapezoid on a refinement of `[-l, l]`
    /// whose nodes include every kink.
    pub fn new(data: &InitialData<T>, l: T) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(Error::BadRange(format!("table half-width must be positive, got {l}")));
        }
        let integrand = |x: T| {
            let d = data.u0x(x);
            T::one() + d * d
        };
        let breaks = data.breakpoints(l);
        let mut x = vec![breaks[0]];
        let mut f_left = Vec::new();
        let mut f_right = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let n = (((b - a) / (l + l)).as_f64() * TABLE_CELLS as f64).ceil().max(1.0) as usize;
            let h = (b - a) / T::of_usize(n);
            let mut prev = integrand(inward(a, b));
            for i in 1..=n {
                let xi = if i == n { b } else { a + T::of_usize(i) * h };
                let fi = if i == n { integrand(inward(b, a)) } else { integrand(xi) };
                f_left.push(prev);
                f_right.push(fi);
                x.push(xi);
                prev = fi;
            }
        }
        if let Some(i) = f_left.iter().chain(f_right.iter()).position(|f| !f.is_finite()) {
            return Err(Error::QuadratureFailure(format!("integrand 1 + u0x^2 not finite in cell {}", i % f_left.len())));
        }
        let mut cum = Vec::with_capacity(x.len());
        cum.push(T::zero());
        for c in 0..f_left.len() {
            let prev = cum[c];
            cum.push(prev + (x[c + 1] - x[c]) * (f_left[c] + f_right[c]) / T::lit(2.0));
        }
        // anchor at x = 0, which is always a node
        let zero_at = x.iter().position(|&v| v == T::zero()).expect("0 is a breakpoint");
        let shift = cum[zero_at];
        for c in cum.iter_mut() {
            *c -= shift;
        }
        Ok(Self { x, cum, f_left, f_right, data: data.clone() })
    }

    pub fn data(&self) -> &InitialData<T> {
        &self.data
    }

    /// Label range covered by the table: `(xi(-l), xi(l))`.
    pub fn xi_span(&self) -> (T, T) {
        (self.cum[0], *self.cum.last().unwrap())
    }

    pub fn y_span(&self) -> (T, T) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// Forward map `xi(y)`.
    pub fn xi_of_y(&self, y: T) -> T {
        let (lo, hi) = self.y_span();
        if y <= lo {
            return self.cum[0] + (y - lo);
        }
        if y >= hi {
            return *self.cum.last().unwrap() + (y - hi);
        }
        let c = crate::scalar::locate_cell(&self.x, y);
        self.partial(c, y)
    }

    fn integrand_in_cell(&self, c: usize, y: T) -> T {
        if y <= self.x[c] {
            return self.f_left[c];
        }
        if y >= self.x[c + 1] {
            return self.f_right[c];
        }
        let d = self.data.u0x(y);
        T::one() + d * d
    }

    fn partial(&self, c: usize, y: T) -> T {
        let fy = self.integrand_in_cell(c, y);
        self.cum[c] + (y - self.x[c]) * (self.f_left[c] + fy) / T::lit(2.0)
    }

    /// Inverse map `y0(xi)` with `|xi(y0) - xi| <= tol` in table quadrature:
    /// monotone bracketing, bisection to width `tol`, one Newton polish.
    pub fn y0(&self, xi: T, tol: T) -> T {
        let (xlo, xhi) = self.xi_span();
        let (ylo, yhi) = self.y_span();
        if xi <= xlo {
            return ylo + (xi - xlo);
        }
        if xi >= xhi {
            return yhi + (xi - xhi);
        }
        let c = self.cum.partition_point(|&v| v <= xi).saturating_sub(1).min(self.cum.len() - 2);
        let (mut a, mut b) = (self.x[c], self.x[c + 1]);
        let fmax = self.f_left[c].max(self.f_right[c]).max(T::one());
        let width = tol / (fmax + fmax);
        while b - a > width {
            let mid = (a + b) / T::lit(2.0);
            if mid <= a || mid >= b {
                break;
            }
            if self.partial(c, mid) < xi {
                a = mid;
            } else {
                b = mid;
            }
        }
        let y = (a + b) / T::lit(2.0);
        let slope = self.integrand_in_cell(c, y);
        let polished = y - (self.partial(c, y) - xi) / slope;
        if polished >= self.x[c] && polished <= self.x[c + 1] {
            polished
        } else {
            y
        }
    }
}

/// `y0(xi)` for a single label. Builds a table over the truncation interval
/// with `mu = 1`; use [`Y0Map`] directly when inverting many labels.
pub fn y0_of_xi<T: Real>(init: &InitialData<T>, xi: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::BadRange(format!("tolerance must be positive, got {tol}")));
    }
    let l = init.truncation_halfwidth(T::one()).max(xi.abs());
    Ok(Y0Map::new(init, l)?.y0(xi, tol))
}

/// Grid whose labels map onto `[-L, L]`, `L = decay_halfwidth + 10 sqrt(mu)`.
/// With one or two kinks inside, their labels sit on doubled nodes.
pub fn auto_grid<T: Real>(init: &InitialData<T>, mu: T, n: usize) -> Result<(XiGrid<T>, Y0Map<T>)> {
    let map = Y0Map::new(init, init.truncation_halfwidth(mu))?;
    let (lo, hi) = map.xi_span();
    let anchors: Vec<T> = init.kinks.iter().map(|&k| map.xi_of_y(k)).filter(|&a| a > lo && a < hi).collect();
    let grid = if (1..=2).contains(&anchors.len()) {
        XiGrid::aligned(lo, hi, n, &anchors)?
    } else {
        XiGrid::new(lo, hi, n)?
    };
    Ok((grid, map))
}

/// State at `t = 0`: `u = u0(y0)`, `v = 2 arctan u0x(y0)`, `q = 1`, `y = y0`.
pub fn initial_state<T: Real>(init: &InitialData<T>, grid: &XiGrid<T>, tol: T) -> Result<LagrangianState<T>> {
    // y0 is 1-Lipschitz with y0(0) = 0, so |y0(xi)| <= |xi| on the grid
    let l = grid.xi_min().abs().max(grid.xi_max().abs()).max(init.decay_halfwidth).max(T::one());
    let map = Y0Map::new(init, l)?;
    initial_state_from_map(&map, grid, tol)
}

pub fn initial_state_from_map<T: Real>(map: &Y0Map<T>, grid: &XiGrid<T>, tol: T) -> Result<LagrangianState<T>> {
    let init = map.data();
    let n = grid.len();
    let mut s = LagrangianState {
        t: T::zero(),
        u: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        q: vec![T::one(); n],
        y: Vec::with_capacity(n),
    };
    let two = T::lit(2.0);
    let mut y_prev = T::zero();
    for (i, &xi) in grid.values().iter().enumerate() {
        // doubled nodes take the one-sided slopes
        let y = if i > 0 && grid.is_split_cell(i - 1) { y_prev } else { map.y0(xi, tol) };
        let slope_at = if grid.is_split_cell(i) {
            inward(y, y - T::one())
        } else if i > 0 && grid.is_split_cell(i - 1) {
            inward(y, y + T::one())
        } else {
            y
        };
        s.y.push(y);
        s.u.push(init.u0(y));
        s.v.push(two * init.u0x(slope_at).atan());
        y_prev = y;
    }
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> InitialData<f64> {
        InitialData::new(|x: f64| (-x * x).exp(), 6.5).with_derivative(|x: f64| -2.0 * x * (-x * x).exp())
    }

    #[test]
    fn zero_profile_is_identity() {
        let init = InitialData::<f64>::zero();
        for xi in [-3.0, -0.5, 0.0, 0.25, 7.0] {
            assert!((y0_of_xi(&init, xi, 1e-12).unwrap() - xi).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_integrand_near_origin() {
        let slope = 3.0_f64.sqrt();
        let init = InitialData::new(move |x: f64| slope * x * (-x.powi(8)).exp(), 3.0);
        // 1 + u0x^2 = 4 near 0 (fallback derivative exercised here)
        for xi in [-0.02, 0.01, 0.03] {
            let y = y0_of_xi(&init, xi, 1e-13).unwrap();
            assert!((y - xi / 4.0).abs() < 1e-9, "{y} vs {}", xi / 4.0);
        }
    }

    /// Independent reference: cumulative trapezoid at a much finer spacing
    /// and plain bisection.
    fn brute_force_y0(u0x: impl Fn(f64) -> f64, xi: f64) -> f64 {
        let n = 20_000_000usize;
        let top = 2.0;
        let dx = top / n as f64;
        let f = |x: f64| 1.0 + u0x(x).powi(2);
        let (mut acc, mut prev) = (0.0, f(0.0));
        let mut i = 0;
        while acc < xi {
            let x1 = (i + 1) as f64 * dx;
            let f1 = f(x1);
            let step = dx * (prev + f1) / 2.0;
            if acc + step >= xi {
                // bisection within the cell on the linear-in-f model
                let (mut a, mut b) = (i as f64 * dx, x1);
                for _ in 0..80 {
                    let m = (a + b) / 2.0;
                    let part = (m - i as f64 * dx) * (prev + f(m)) / 2.0;
                    if acc + part < xi { a = m } else { b = m }
                }
                return (a + b) / 2.0;
            }
            acc += step;
            prev = f1;
            i += 1;
        }
        unreachable!()
    }

    #[test]
    fn gaussian_y0_matches_fine_reference() {
        let init = gaussian();
        let y = y0_of_xi(&init, 1.0, 1e-13).unwrap();
        let reference = brute_force_y0(|x| -2.0 * x * (-x * x).exp(), 1.0);
        assert!((y - reference).abs() < 1e-9, "{y} vs {reference}");
        // inversion is tight against the table it inverts
        let map = Y0Map::new(&init, init.truncation_halfwidth(1.0)).unwrap();
        assert!((map.xi_of_y(y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y0_is_monotone_and_one_lipschitz() {
        let init = gaussian();
        let map = Y0Map::new(&init, 8.0).unwrap();
        let tol = 1e-12;
        let xs: Vec<f64> = (0..400).map(|i| -9.0 + 0.045 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| map.y0(x, tol)).collect();
        for i in 0..xs.len() {
            for j in (i + 1..xs.len()).step_by(7) {
                let d = ys[j] - ys[i];
                assert!(d >= 0.0 && d <= xs[j] - xs[i] + tol);
            }
        }
    }

    #[test]
    fn initial_state_fields() {
        let init = InitialData::<f64>::zero();
        let grid = XiGrid::new(-5.0, 5.0, 21).unwrap();
        let s = initial_state(&init, &grid, 1e-12).unwrap();
        assert!(s.u.iter().chain(s.v.iter()).all(|&x| x == 0.0));
        assert!(s.q.iter().all(|&q| q == 1.0));
        for (y, xi) in s.y.iter().zip(grid.values()) {
            assert!((y - xi).abs() < 1e-12);
        }

        // u0x = 1 at x = 0 gives v = pi/2 at the label xi = 0
        let init = InitialData::new(|x: f64| x.sin() * (-x * x / 50.0).exp(), 30.0);
        let grid = XiGrid::new(-2.0, 2.0, 17).unwrap();
        let s = initial_state(&init, &grid, 1e-13).unwrap();
        assert!((s.y[8]).abs() < 1e-12);
        assert!((s.v[8] - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn kinked_profile_table_is_exact_for_piecewise_constant_slope() {
        // tent: slope +1 on [-1, 0], -1 on [0, 1]
        let init = InitialData::new(|x: f64| (1.0 - x.abs()).max(0.0), 1.0)
            .with_derivative(|x: f64| if x.abs() >= 1.0 || x == 0.0 { 0.0 } else { -x.signum() })
            .with_kinks(vec![-1.0, 0.0, 1.0]);
        let map = Y0Map::new(&init, 3.0).unwrap();
        assert!((map.xi_of_y(1.0) - 2.0).abs() < 1e-9);
        assert!((map.xi_of_y(-1.0) + 2.0).abs() < 1e-9);
        assert!((map.xi_of_y(2.0) - 3.0).abs() < 1e-9);
        assert!((map.y0(1.0, 1e-13) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let init = InitialData::new(|x: f64| x, 1.0).with_derivative(|x: f64| if x > 0.5 { f64::INFINITY } else { 1.0 });
        assert!(matches!(Y0Map::new(&init, 1.0), Err(Error::QuadratureFailure(_))));
    }
}
