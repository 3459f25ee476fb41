//! Parameter records and the intensity of the interference process on the
//! power axis.
//!
//! Interferers form a homogeneous PPP of density λ; the receiver only
//! listens inside a sector of width φ. Mapping each interferer to
//! `z = |x|^α / h` (the inverse of its received power) produces a PPP on
//! the positive half-line whose intensity measure is
//!
//! ```text
//! Λ₂(z) = (φλ/2) · E[h^{2/α}] · z^{2/α}
//! ```
//!
//! Every closed form downstream reads its inputs from [`PowerIntensity`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{ln_gamma, regularized_lower};

/// Node density, path-loss exponent and reception angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct NetworkModel {
    lambda: f64,
    alpha: f64,
    phi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    lambda: f64,
    alpha: f64,
    phi: f64,
}

impl TryFrom<RawNetwork> for NetworkModel {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        NetworkModel::new(raw.lambda, raw.alpha, raw.phi)
    }
}

impl NetworkModel {
    pub fn new(lambda: f64, alpha: f64, phi: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("node density must be > 0, got {lambda}")));
        }
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("path-loss exponent must be > 2, got {alpha}")));
        }
        if !(phi > 0.0 && phi <= 2.0 * std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("reception angle must lie in (0, 2π], got {phi}")));
        }
        Ok(Self { lambda, alpha, phi })
    }

    /// Same density and path loss, full 2π reception.
    pub fn omnidirectional(&self) -> Self {
        Self { phi: 2.0 * std::f64::consts::PI, ..*self }
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.lambda, self.alpha, phi)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.alpha, self.phi)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Nakagami-m power gain: Gamma distributed with shape `m` and mean `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFading")]
pub struct FadingModel {
    m: f64,
    omega: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    m: f64,
    #[serde(default = "unit")]
    omega: f64,
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<RawFading> for FadingModel {
    type Error = Error;

    fn try_from(raw: RawFading) -> Result<Self> {
        FadingModel::new(raw.m, raw.omega)
    }
}

impl FadingModel {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m > 0.5) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("Nakagami shape must be > 1/2, got {m}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("fading power must be > 0, got {omega}")));
        }
        Ok(Self { m, omega })
    }

    /// Rayleigh fading (m = 1).
    pub fn rayleigh(omega: f64) -> Result<Self> {
        Self::new(1.0, omega)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// E[h] = Ω.
    pub fn mean_gain(&self) -> f64 {
        self.omega
    }

    /// `Some(m)` when the shape is a positive integer.
    pub fn integer_shape(&self) -> Option<u32> {
        (self.m == self.m.round() && self.m <= f64::from(u32::MAX)).then_some(self.m as u32)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let rate = self.m / self.omega;
        let log = self.m * rate.ln() + (self.m - 1.0) * x.ln() - rate * x - ln_gamma(self.m).expect("m > 1/2");
        log.exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        regularized_lower(self.m, self.m * x / self.omega).expect("valid shape")
    }
}

/// Tx–rx distance, SIR threshold and the number of dominant interferers
/// removed before the SIR is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub u: f64,
    pub eta: f64,
    pub n_excluded: u32,
}

impl LinkModel {
    pub fn new(u: f64, eta: f64, n_excluded: u32) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::InvalidParameter(format!("link distance must be > 0, got {u}")));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!("SIR threshold must be > 0, got {eta}")));
        }
        Ok(Self { u, eta, n_excluded })
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.u, eta, self.n_excluded)
    }

    pub fn with_excluded(&self, n: u32) -> Self {
        Self { n_excluded: n, ..*self }
    }
}

/// E[h^{2/α}] = (m/Ω)^{-2/α} Γ(m + 2/α) / Γ(m).
pub fn fractional_moment(fading: &FadingModel, alpha: f64) -> f64 {
    let delta = 2.0 / alpha;
    let (m, omega) = (fading.m(), fading.omega());
    (omega / m).powf(delta) * (ln_gamma(m + delta).unwrap() - ln_gamma(m).unwrap()).exp()
}

/// Intensity of the inverse-power process Φ₂.
///
/// Λ₂(z) = rate · z^{2/α} with rate = φλ E[h^{2/α}] / 2. The inverse is
/// closed form, which makes the Gamma substitution used by the quadrature
/// exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIntensity {
    rate: f64,
    alpha: f64,
    moment: f64,
}

impl PowerIntensity {
    pub fn new(net: &NetworkModel, fading: &FadingModel) -> Self {
        let moment = fractional_moment(fading, net.alpha());
        Self { rate: 0.5 * net.phi() * net.lambda() * moment, alpha: net.alpha(), moment }
    }

    /// φλ E[h^{2/α}] / 2.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// E[h^{2/α}].
    pub fn fractional_moment(&self) -> f64 {
        self.moment
    }

    /// Λ₂(z).
    pub fn measure(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(domain("power-axis point z", z));
        }
        Ok(self.rate * z.powf(2.0 / self.alpha))
    }

    /// λ₂(z) = dΛ₂/dz.
    pub fn density(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(domain("power-axis point z", z));
        }
        Ok(2.0 * self.rate / self.alpha * z.powf(2.0 / self.alpha - 1.0))
    }

    /// Λ₂⁻¹(t).
    pub fn inverse(&self, t: f64) -> f64 {
        (t / self.rate).powf(self.alpha / 2.0)
    }

    /// E[z_n^{2q/α}] = Γ(n + q)/Γ(n) · rate^{-q}, using Λ₂(z_n) ~ Gamma(n, 1).
    pub(crate) fn point_moment(&self, n: u32, q: f64) -> Result<f64> {
        let ratio = crate::specfun::pochhammer_ratio(n, q)?;
        Ok(ratio * self.rate.powf(-q))
    }
}

/// Λ₂(z).
pub fn intensity_measure_2(net: &NetworkModel, fading: &FadingModel, z: f64) -> Result<f64> {
    PowerIntensity::new(net, fading).measure(z)
}

/// λ₂(z) = (φλ/α) E[h^{2/α}] z^{2/α - 1}.
pub fn intensity_density_2(net: &NetworkModel, fading: &FadingModel, z: f64) -> Result<f64> {
    PowerIntensity::new(net, fading).density(z)
}
