//! Built-in initial profiles.

use crate::error::{Error, Result};
use crate::init::InitialData;
use crate::scalar::Real;

/// Default threshold below which a profile counts as decayed.
pub const DEFAULT_DECAY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `amplitude * exp(-((x - center) / width)^2)`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// `c * exp(-|x - center|)`
    Peakon { c: f64, center: f64 },
    /// Peakon of height `c` at `-separation/2` and antipeakon of depth `-c`
    /// at `+separation/2`; they collide.
    AntipeakonPair { c: f64, separation: f64 },
    /// Piecewise-linear interpolation of `(x, u0)` samples, zero outside.
    Tabulated { x: Vec<f64>, u: Vec<f64> },
}

fn ln_ratio(amplitude: f64, tol: f64) -> f64 {
    (amplitude.abs().max(tol) / tol).ln().max(0.0)
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Gaussian { .. } => "gaussian",
            Profile::Peakon { .. } => "peakon",
            Profile::AntipeakonPair { .. } => "antipeakon_pair",
            Profile::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadRange(format!("{} profile: {msg}", self.name())));
        match self {
            Profile::Zero => Ok(()),
            Profile::Gaussian { amplitude, width, center } => {
                if !(amplitude.is_finite() && center.is_finite() && *width > 0.0 && width.is_finite()) {
                    return bad("need finite amplitude/center and width > 0");
                }
                Ok(())
            }
            Profile::Peakon { c, center } => {
                if !(c.is_finite() && center.is_finite()) {
                    return bad("non-finite parameters");
                }
                Ok(())
            }
            Profile::AntipeakonPair { c, separation } => {
                if !(c.is_finite() && *separation > 0.0 && separation.is_finite()) {
                    return bad("need finite c and separation > 0");
                }
                Ok(())
            }
            Profile::Tabulated { x, u } => {
                if x.len() != u.len() || x.len() < 2 {
                    return bad("need at least two (x, u0) pairs of equal length");
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("x must be strictly increasing");
                }
                if x.iter().chain(u.iter()).any(|v| !v.is_finite()) {
                    return bad("non-finite samples");
                }
                Ok(())
            }
        }
    }

    /// Evaluators for `u0`, `u0x` and the decay half-width at `decay_tol`.
    pub fn initial_data<T: Real>(&self, decay_tol: f64) -> Result<InitialData<T>> {
        self.validate()?;
        let lit = T::lit;
        Ok(match self.clone() {
            Profile::Zero => InitialData::zero(),
            Profile::Gaussian { amplitude, width, center } => {
                let (a, w, c) = (lit(amplitude), lit(width), lit(center));
                // derivative carries an extra factor ~ x/w^2; one more width covers it
                let half = center.abs() + width * (ln_ratio(amplitude, decay_tol).sqrt() + 1.0);
                InitialData::new(move |x: T| {
                    let z = (x - c) / w;
                    a * (-z * z).exp()
                }, lit(half))
                .with_derivative(move |x: T| {
                    let z = (x - c) / w;
                    -lit(2.0) * a * z / w * (-z * z).exp()
                })
            }
            Profile::Peakon { c, center } => {
                let (amp, x0) = (lit(c), lit(center));
                let half = center.abs() + ln_ratio(c, decay_tol);
                InitialData::new(move |x: T| amp * (-(x - x0).abs()).exp(), lit(half))
                    .with_derivative(move |x: T| -amp * sign(x - x0) * (-(x - x0).abs()).exp())
                    .with_kinks(vec![x0])
            }
            Profile::AntipeakonPair { c, separation } => {
                let (amp, a) = (lit(c), lit(separation / 2.0));
                let half = separation / 2.0 + ln_ratio(c, decay_tol);
                InitialData::new(move |x: T| amp * ((-(x + a).abs()).exp() - (-(x - a).abs()).exp()), lit(half))
                    .with_derivative(move |x: T| {
                        amp * (-sign(x + a) * (-(x + a).abs()).exp() + sign(x - a) * (-(x - a).abs()).exp())
                    })
                    .with_kinks(vec![-a, a])
            }
            Profile::Tabulated { x, u } => {
                let xs: Vec<T> = x.iter().map(|&v| lit(v)).collect();
                let us: Vec<T> = u.iter().map(|&v| lit(v)).collect();
                let half = x[0].abs().max(x[x.len() - 1].abs());
                let (xs2, us2) = (xs.clone(), us.clone());
                InitialData::new(move |p: T| table_value(&xs, &us, p), lit(half))
                    .with_derivative(move |p: T| table_slope(&xs2, &us2, p))
                    .with_kinks(x.iter().map(|&v| lit(v)).collect())
            }
        })
    }
}

#[inline]
fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

fn table_value<T: Real>(xs: &[T], us: &[T], p: T) -> T {
    if p < xs[0] || p > xs[xs.len() - 1] {
        return T::zero();
    }
    let c = crate::scalar::locate_cell(xs, p);
    let th = (p - xs[c]) / (xs[c + 1] - xs[c]);
    us[c] + th * (us[c + 1] - us[c])
}

fn table_slope<T: Real>(xs: &[T], us: &[T], p: T) -> T {
    if p < xs[0] || p > xs[xs.len() - 1] {
        return T::zero();
    }
    let c = crate::scalar::locate_cell(xs, p);
    (us[c + 1] - us[c]) / (xs[c + 1] - xs[c])
}
