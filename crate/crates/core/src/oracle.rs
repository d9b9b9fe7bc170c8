//! Eulerian reference solver for smooth solutions, independent of the
//! Lagrangian machinery.
//!
//! Method of lines for `u_t + ((s/mu) u - eta/mu) u_x = -P_x` on a uniform
//! `x` grid: fourth-order central differences (zero outside the grid), a
//! direct `O(M^2)` sum for the convolution, RK4 in time. The convolution is
//! the trapezoid rule plus its endpoint correction at the kernel kink, which
//! keeps it fourth order like the derivatives.

use crate::error::{Error, Result};
use crate::init::InitialData;
use crate::params::ModelParams;
use crate::scalar::{max_abs, Real};

/// Run is aborted once `max |u_x|` exceeds this multiple of `max |u0_x| + 1`.
pub const BLOWUP_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerianSolverConfig<T> {
    pub x_min: T,
    pub x_max: T,
    pub m: usize,
    pub dt: T,
    pub t_end: T,
    pub snapshot_every: usize,
}

impl<T: Real> EulerianSolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) {
            return Err(Error::BadRange(format!("x range [{}, {}]", self.x_min, self.x_max)));
        }
        if self.m < 64 {
            return Err(Error::BadRange(format!("need M >= 64, got {}", self.m)));
        }
        if !(self.dt > T::zero() && self.t_end > T::zero()) {
            return Err(Error::BadRange(format!("need dt, T > 0, got dt={} T={}", self.dt, self.t_end)));
        }
        Ok(())
    }

    pub fn x_grid(&self) -> Vec<T> {
        let dx = (self.x_max - self.x_min) / T::of_usize(self.m - 1);
        (0..self.m).map(|i| if i + 1 == self.m { self.x_max } else { self.x_min + T::of_usize(i) * dx }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianSolution<T> {
    pub x: Vec<T>,
    /// `(t, u)` pairs, starting with `t = 0`.
    pub frames: Vec<(T, Vec<T>)>,
}

impl<T: Real> EulerianSolution<T> {
    pub fn last(&self) -> &(T, Vec<T>) {
        self.frames.last().expect("at least the initial frame")
    }
}

struct Operator<T> {
    dx: T,
    /// `exp(-k dx / sqrt(mu))` for `k = 0..M`.
    kernel: Vec<T>,
}

impl<T: Real> Operator<T> {
    fn new(m: usize, dx: T, sqrt_mu: T) -> Self {
        Self { dx, kernel: (0..m).map(|k| (-(T::of_usize(k) * dx) / sqrt_mu).exp()).collect() }
    }

    fn ddx(&self, u: &[T]) -> Vec<T> {
        let m = u.len();
        let at = |i: isize| if i < 0 || i >= m as isize { T::zero() } else { u[i as usize] };
        let c = T::one() / (T::lit(12.0) * self.dx);
        (0..m as isize)
            .map(|i| (at(i - 2) - T::lit(8.0) * at(i - 1) + T::lit(8.0) * at(i + 1) - at(i + 2)) * c)
            .collect()
    }

    /// `(P, P_x)` for the source samples `f`.
    fn convolve(&self, f: &[T], params: &ModelParams<T>) -> (Vec<T>, Vec<T>) {
        let m = f.len();
        let half = T::lit(0.5);
        let mut fw = f.to_vec();
        fw[0] *= half;
        fw[m - 1] *= half;
        let mut p = Vec::with_capacity(m);
        let mut px = Vec::with_capacity(m);
        let df = self.ddx(f);
        let sqrt_mu = params.sqrt_mu();
        let corr = self.dx * self.dx / (T::lit(12.0) * params.mu);
        for i in 0..m {
            // left part: j < i, distance i - j
            let left: T = fw[..i].iter().rev().zip(&self.kernel[1..]).map(|(&a, &k)| a * k).sum();
            let right: T = fw[i + 1..].iter().zip(&self.kernel[1..]).map(|(&a, &k)| a * k).sum();
            let own = fw[i];
            p.push(self.dx * (left + right + own) / (T::lit(2.0) * sqrt_mu) - corr * f[i]);
            px.push(self.dx * (right - left) / (T::lit(2.0) * params.mu) + corr * df[i]);
        }
        (p, px)
    }

    fn rhs(&self, u: &[T], params: &ModelParams<T>) -> (Vec<T>, Vec<T>) {
        let ux = self.ddx(u);
        let half_s = params.s / T::lit(2.0);
        let f: Vec<T> = u.iter().zip(&ux).map(|(&u, &d)| params.source_w(u) + half_s * d * d).collect();
        let (_, px) = self.convolve(&f, params);
        let du = (0..u.len()).map(|i| -params.transport_speed(u[i]) * ux[i] - px[i]).collect();
        (du, ux)
    }
}

/// `∫ u^2 + mu u_x^2 dx` by the trapezoid rule with fourth-order `u_x`.
pub fn eulerian_energy<T: Real>(x: &[T], u: &[T], mu: T) -> T {
    let dx = x[1] - x[0];
    let ux = Operator { dx, kernel: Vec::new() }.ddx(u);
    let m = u.len();
    (0..m)
        .map(|i| {
            let w = if i == 0 || i + 1 == m { dx / T::lit(2.0) } else { dx };
            w * (u[i] * u[i] + mu * ux[i] * ux[i])
        })
        .sum()
}

pub fn solve_eulerian<T: Real>(
    init: &InitialData<T>,
    params: &ModelParams<T>,
    cfg: &EulerianSolverConfig<T>,
) -> Result<EulerianSolution<T>> {
    cfg.validate()?;
    let x = cfg.x_grid();
    let dx = x[1] - x[0];
    let op = Operator::new(cfg.m, dx, params.sqrt_mu());
    let mut u: Vec<T> = x.iter().map(|&x| init.u0(x)).collect();
    let threshold = T::lit(BLOWUP_FACTOR) * (max_abs(&op.ddx(&u)) + T::one());
    let n = (cfg.t_end / cfg.dt).round().max(T::one()).to_usize().expect("finite step count");
    let dt = cfg.t_end / T::of_usize(n);
    let every = cfg.snapshot_every.max(1);
    let mut frames = vec![(T::zero(), u.clone())];
    let axpy = |a: &[T], c: T, k: &[T]| -> Vec<T> { a.iter().zip(k).map(|(&a, &k)| a + c * k).collect() };
    let two = T::lit(2.0);
    for step in 1..=n {
        let (k1, _) = op.rhs(&u, params);
        let (k2, _) = op.rhs(&axpy(&u, dt / two, &k1), params);
        let (k3, _) = op.rhs(&axpy(&u, dt / two, &k2), params);
        let (k4, _) = op.rhs(&axpy(&u, dt, &k3), params);
        for i in 0..u.len() {
            u[i] += dt / T::lit(6.0) * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        let t = T::of_usize(step) * dt;
        let max_ux = max_abs(&op.ddx(&u));
        if !(max_ux <= threshold) {
            return Err(Error::GradientBlowup { t: t.as_f64(), max_ux: max_ux.as_f64(), threshold: threshold.as_f64() });
        }
        if step % every == 0 || step == n {
            frames.push((t, u.clone()));
        }
    }
    Ok(EulerianSolution { x, frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Preset;

    fn ch() -> ModelParams<f64> {
        ModelParams::validate(&Preset::CamassaHolm.raw(1.0), false).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = EulerianSolverConfig { x_min: -5.0, x_max: 5.0, m: 64, dt: 0.05, t_end: 0.5, snapshot_every: 1 };
        let sol = solve_eulerian(&InitialData::zero(), &ch(), &cfg).unwrap();
        assert!(sol.frames.iter().all(|(_, u)| u.iter().all(|&x| x == 0.0)));
        assert_eq!(sol.frames.len(), 11);
    }

    #[test]
    fn bad_configs() {
        let mut cfg = EulerianSolverConfig { x_min: -5.0, x_max: 5.0, m: 32, dt: 0.05, t_end: 0.5, snapshot_every: 1 };
        assert!(cfg.validate().is_err());
        cfg.m = 64;
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn convolution_of_constant_and_kink_correction() {
        // interior P of a constant source is the constant, up to the lost
        // kernel tails e^{-20} beyond the grid
        let m = 2001;
        let dx = 0.02;
        let op = Operator::new(m, dx, 1.0);
        let (p, px) = op.convolve(&vec![1.0; m], &ch());
        assert!((p[m / 2] - 1.0).abs() < 3e-9, "{}", p[m / 2]);
        assert!(px[m / 2].abs() < 1e-12);
    }

    #[test]
    fn steep_data_reports_blowup() {
        let init = InitialData::new(|x: f64| -(x * 4.0).tanh() * (-x * x / 4.0).exp(), 8.0);
        let cfg = EulerianSolverConfig { x_min: -10.0, x_max: 10.0, m: 256, dt: 0.005, t_end: 3.0, snapshot_every: 10 };
        assert!(matches!(solve_eulerian(&init, &ch(), &cfg), Err(Error::GradientBlowup { .. })));
    }
}
