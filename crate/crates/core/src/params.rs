//! PDE coefficients, named reductions and the polynomial source term.
//!
//! The equation is
//! `u_t - mu u_txx + 2k u_x + eta u_xxx = (A u + B u^m) u_x + s (2 u_x u_xx + u u_xxx)`,
//! evolved in the nonlocal form `u_t + (s/mu u - eta/mu) u_x = -P_x`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{powi, Real};

/// Unvalidated coefficient record, as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub mu: f64,
    pub k: f64,
    pub eta: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
}

/// Validated coefficients. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub mu: T,
    pub k: T,
    pub eta: T,
    pub s: T,
    pub a: T,
    pub b: T,
    pub m: u32,
    /// `s == 0` was accepted through the override flag.
    pub s_zero_override: bool,
    pub warnings: Vec<String>,
    sqrt_mu: T,
    quad: T,
    power: T,
    linear: T,
}

impl<T: Real> ModelParams<T> {
    /// Checks the hypotheses of the well-posedness theory (`mu > 0`, `s != 0`,
    /// integer `m >= 0`).
    pub fn validate(raw: &RawParams, allow_s_zero: bool) -> Result<Self> {
        let named = [
            ("mu", raw.mu),
            ("k", raw.k),
            ("eta", raw.eta),
            ("s", raw.s),
            ("A", raw.a),
            ("B", raw.b),
            ("m", raw.m),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(Error::NonFiniteCoefficient { name });
            }
        }
        if raw.mu <= 0.0 {
            return Err(Error::NonPositiveMu(raw.mu));
        }
        if raw.m < 0.0 || raw.m.fract() != 0.0 || raw.m > u32::MAX as f64 {
            return Err(Error::NonIntegerM(raw.m));
        }
        let mut warnings = Vec::new();
        if raw.s == 0.0 {
            if !allow_s_zero {
                return Err(Error::ZeroSWithoutOverride);
            }
            let msg = "s = 0 accepted by override: breaking-set and uniqueness results do not apply"
                .to_string();
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let lit = T::lit;
        let (mu, s, a, b) = (lit(raw.mu), lit(raw.s), lit(raw.a), lit(raw.b));
        let (k, eta) = (lit(raw.k), lit(raw.eta));
        let m = raw.m as u32;
        let two = lit(2.0);
        Ok(Self {
            mu,
            k,
            eta,
            s,
            a,
            b,
            m,
            s_zero_override: raw.s == 0.0,
            warnings,
            sqrt_mu: mu.sqrt(),
            quad: -(a / two + s / (two * mu)),
            power: -b / T::of_usize(m as usize + 1),
            linear: two * k + eta / mu,
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            mu: self.mu.as_f64(),
            k: self.k.as_f64(),
            eta: self.eta.as_f64(),
            s: self.s.as_f64(),
            a: self.a.as_f64(),
            b: self.b.as_f64(),
            m: self.m as f64,
        }
    }

    #[inline]
    pub fn sqrt_mu(&self) -> T {
        self.sqrt_mu
    }

    /// Polynomial part of the source inside `P`:
    /// `W(u) = -(A/2 + s/(2 mu)) u^2 - B/(m+1) u^(m+1) + (2k + eta/mu) u`.
    #[inline]
    pub fn source_w(&self, u: T) -> T {
        self.quad * u * u + self.power * powi(u, self.m + 1) + self.linear * u
    }

    /// `dW/du = -(A + s/mu) u - B u^m + (2k + eta/mu)`.
    #[inline]
    pub fn source_w_derivative(&self, u: T) -> T {
        let two = T::lit(2.0);
        two * self.quad * u - self.b * powi(u, self.m) + self.linear
    }

    /// Characteristic speed `(s/mu) u - eta/mu`.
    #[inline]
    pub fn transport_speed(&self, u: T) -> T {
        (self.s * u - self.eta) / self.mu
    }
}

/// Named reductions of the general equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    CamassaHolm,
    DullinGottwaldHolm,
    BbmKdv,
}

impl Preset {
    /// Coefficients of the reduction. `mu_choice` is used only where the
    /// reduction leaves `mu` free (DGH).
    pub fn raw(self, mu_choice: f64) -> RawParams {
        match self {
            Preset::CamassaHolm => RawParams { mu: 1.0, k: 0.0, eta: 0.0, s: 1.0, a: -3.0, b: 0.0, m: 1.0 },
            Preset::DullinGottwaldHolm => RawParams {
                mu: mu_choice,
                k: 0.0,
                eta: mu_choice,
                s: mu_choice,
                a: -3.0,
                b: 0.0,
                m: 1.0,
            },
            Preset::BbmKdv => RawParams { mu: 1.0, k: 0.0, eta: 1.0, s: 0.0, a: -1.0, b: 0.0, m: 1.0 },
        }
    }

    /// Whether `validate` needs the `allow_s_zero` override for this preset.
    pub fn needs_s_zero_override(self) -> bool {
        matches!(self, Preset::BbmKdv)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().replace('-', "_").as_str() {
            "CH" | "CAMASSA_HOLM" => Ok(Preset::CamassaHolm),
            "DGH" | "DULLIN_GOTTWALD_HOLM" => Ok(Preset::DullinGottwaldHolm),
            "BBM_KDV" | "BBMKDV" => Ok(Preset::BbmKdv),
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::CamassaHolm => "CH",
            Preset::DullinGottwaldHolm => "DGH",
            Preset::BbmKdv => "BBM_KdV",
        })
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str, mu_choice: f64) -> Result<RawParams> {
    let p: Preset = name.parse()?;
    if p == Preset::DullinGottwaldHolm && !(mu_choice > 0.0) {
        return Err(Error::NonPositiveMu(mu_choice));
    }
    Ok(p.raw(mu_choice))
}
