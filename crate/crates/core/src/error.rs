use thiserror::Error;

/// Every failure the solver can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mu must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("s = 0 requires the allow_s_zero override")]
    ZeroSWithoutOverride,
    #[error("m must be a nonnegative integer, got {0}")]
    NonIntegerM(f64),
    #[error("coefficient {name} is not finite")]
    NonFiniteCoefficient { name: &'static str },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("non-finite state value in {field} at index {index}")]
    NonFiniteState { field: &'static str, index: usize },
    #[error("q <= 0 at index {index} (t = {t}); time step too large")]
    NonPositiveQ { index: usize, t: f64 },
    #[error("x = {x} lies outside the characteristic span [{lo}, {hi}]")]
    XOutsideRange { x: f64, lo: f64, hi: f64 },
    #[error("beta chart not strictly increasing at index {0}")]
    NonMonotoneChart(usize),
    #[error("beta = {beta} outside the chart range [{lo}, {hi}]")]
    BetaOutsideRange { beta: f64, lo: f64, hi: f64 },
    #[error("Picard iteration did not reach tolerance after {iterations} iterations (last change {last_change:e})")]
    PicardDivergence { iterations: usize, last_change: f64 },
    #[error("gradient blow-up: max |u_x| = {max_ux} exceeds {threshold} at t = {t}")]
    GradientBlowup { t: f64, max_ux: f64, threshold: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for messages that must name the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveMu(_) => "NonPositiveMu",
            Error::ZeroSWithoutOverride => "ZeroSWithoutOverride",
            Error::NonIntegerM(_) => "NonIntegerM",
            Error::NonFiniteCoefficient { .. } => "NonFiniteCoefficient",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::BadRange(_) => "BadRange",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::NonPositiveQ { .. } => "NonPositiveQ",
            Error::XOutsideRange { .. } => "XOutsideRange",
            Error::NonMonotoneChart(_) => "NonMonotoneChart",
            Error::BetaOutsideRange { .. } => "BetaOutsideRange",
            Error::PicardDivergence { .. } => "PicardDivergence",
            Error::GradientBlowup { .. } => "GradientBlowup",
            Error::InvalidState(_) => "InvalidState",
        }
    }

    /// Whether the error comes from bad input rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveMu(_)
                | Error::ZeroSWithoutOverride
                | Error::NonIntegerM(_)
                | Error::NonFiniteCoefficient { .. }
                | Error::UnknownPreset(_)
                | Error::BadRange(_)
        )
    }
}
