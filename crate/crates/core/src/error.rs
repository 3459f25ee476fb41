use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("gamma function pole at a = {0}")]
    Pole(f64),

    #[error("series for {what} did not converge after {terms} terms")]
    SeriesNotConverged { what: &'static str, terms: usize },

    #[error("moment does not exist: E[I_n] requires n > alpha/2 (n = {n}, alpha = {alpha})")]
    MomentDoesNotExist { n: u32, alpha: f64 },

    #[error("derivative order {order} exceeds supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("quadrature did not converge (residual estimate {residual:e}, value {value:e})")]
    Quadrature { value: f64, residual: f64 },

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("rate {rate} does not exceed arrival rate {lambda_d}: queue unstable")]
    InfeasibleRate { rate: f64, lambda_d: f64 },

    #[error("window too small: {censored} of {trials} trials had fewer than {rank} points")]
    WindowTooSmall { censored: usize, trials: usize, rank: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
