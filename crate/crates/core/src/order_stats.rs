//! Distribution and moments of the n-th dominant interference power.
//!
//! `z_n` is the n-th smallest point of the inverse-power process, so
//! `I_n = 1 / z_n` is the n-th largest received interference power.
//! Because the number of points in [0, z] is Poisson with mean Λ₂(z),
//! Λ₂(z_n) is Gamma(n, 1) distributed; all results below follow from that.

use crate::error::{domain, Error, Result};
use crate::model::{FadingModel, NetworkModel, PowerIntensity};
use crate::specfun::{ln_gamma, regularized_lower};

/// Rank of a dominant interferer, 1 = strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DominantIndex(u32);

impl DominantIndex {
    pub const FIRST: DominantIndex = DominantIndex(1);

    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dominant rank must be >= 1".into()));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn next(self) -> Self {
        Self(self.0 + 1)
    }
}

impl TryFrom<u32> for DominantIndex {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

/// Density of z_n: 2 e^{-Λ₂(z)} Λ₂(z)^n / (α z (n-1)!).
pub fn pdf_zn(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain("z_n", z));
    }
    let intensity = PowerIntensity::new(net, fading);
    let t = intensity.measure(z)?;
    let k = f64::from(n.get());
    let log = (2.0 / net.alpha()).ln() - t + k * t.ln() - z.ln() - ln_gamma(k)?;
    Ok(log.exp())
}

/// CDF of z_n: γ(n, Λ₂(z)) / Γ(n).
pub fn cdf_zn(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(domain("z_n", z));
    }
    let t = PowerIntensity::new(net, fading).measure(z)?;
    regularized_lower(f64::from(n.get()), t)
}

/// CDF of I_n at x: Γ(n, Λ₂(1/x)) / Γ(n), i.e. the complement of the z_n
/// CDF at 1/x.
pub fn cdf_in(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("interference power", x));
    }
    let t = PowerIntensity::new(net, fading).measure(1.0 / x)?;
    crate::specfun::regularized_upper(f64::from(n.get()), t)
}

/// E[I_n] = (φ h̄_{2/α} λ / 2)^{α/2} Γ(n - α/2) / Γ(n), defined for n > α/2.
pub fn mean_in(net: &NetworkModel, fading: &FadingModel, n: DominantIndex) -> Result<f64> {
    let alpha = net.alpha();
    if !(f64::from(n.get()) > alpha / 2.0) {
        return Err(Error::MomentDoesNotExist { n: n.get(), alpha });
    }
    PowerIntensity::new(net, fading).point_moment(n.get(), -alpha / 2.0)
}

/// E[z_n] = (h̄_{2/α} λ φ / 2)^{-α/2} Γ(n + α/2) / Γ(n).
pub fn mean_zn(net: &NetworkModel, fading: &FadingModel, n: DominantIndex) -> Result<f64> {
    PowerIntensity::new(net, fading).point_moment(n.get(), net.alpha() / 2.0)
}

/// Mode of the z_n density, the point where Λ₂(z) = n - α/2.
pub fn mode_zn(net: &NetworkModel, fading: &FadingModel, n: DominantIndex) -> Result<f64> {
    // log f = -Λ₂ + n ln Λ₂ - ln z + const and z dΛ₂/dz = (2/α) Λ₂, so the
    // stationarity condition is (2/α)(n - Λ₂) = 1.
    let target = f64::from(n.get()) - net.alpha() / 2.0;
    if !(target > 0.0) {
        return Err(domain("mode exists only for n > alpha/2", f64::from(n.get())));
    }
    Ok(PowerIntensity::new(net, fading).inverse(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{adaptive_kronrod, gamma_weighted_expectation, Tolerance};
    use std::f64::consts::PI;

    fn net() -> NetworkModel {
        NetworkModel::new(1e-4, 3.0, PI / 4.0).unwrap()
    }

    fn fading() -> FadingModel {
        FadingModel::new(2.0, 1.0).unwrap()
    }

    fn idx(n: u32) -> DominantIndex {
        DominantIndex::new(n).unwrap()
    }

    #[test]
    fn rank_must_be_positive() {
        assert!(DominantIndex::new(0).is_err());
        assert_eq!(DominantIndex::FIRST.next().get(), 2);
    }

    #[test]
    fn pdf_integrates_to_one() {
        let (net, fading) = (net(), fading());
        let intensity = PowerIntensity::new(&net, &fading);
        for n in [1, 2, 5] {
            // integrate in u = ln z, where the density is smooth and compact
            let lo = intensity.inverse(1e-12).ln();
            let hi = intensity.inverse(f64::from(n) + 60.0).ln();
            let mut f = |u: f64| {
                let z = u.exp();
                pdf_zn(&net, &fading, idx(n), z).unwrap() * z
            };
            let r = adaptive_kronrod(&mut f, lo, hi, Tolerance::default(), 2000);
            assert!((r.value - 1.0).abs() < 1e-6, "n={n}: {}", r.value);
        }
    }

    #[test]
    fn mode_satisfies_stationarity() {
        let (net, fading) = (net(), fading());
        for n in [2, 3, 6] {
            let mode = mode_zn(&net, &fading, idx(n)).unwrap();
            let h = 1e-4 * mode;
            let f = |z: f64| pdf_zn(&net, &fading, idx(n), z).unwrap().ln();
            let slope = (f(mode + h) - f(mode - h)) / (2.0 * h);
            assert!(slope.abs() * mode < 1e-6, "n={n}, slope {slope}");
            assert!(f(mode) > f(1.1 * mode) && f(mode) > f(0.9 * mode));
        }
    }

    #[test]
    fn cdf_basic_identities() {
        let (net, fading) = (net(), fading());
        assert_eq!(cdf_zn(&net, &fading, idx(3), 0.0).unwrap(), 0.0);
        let intensity = PowerIntensity::new(&net, &fading);
        for z in [1e4, 1e6, 1e7, 5e7] {
            let t = intensity.measure(z).unwrap();
            let f1 = cdf_zn(&net, &fading, idx(1), z).unwrap();
            assert!((f1 - (1.0 - (-t).exp())).abs() < 1e-14);
        }
        // F(z where Λ₂(z) = n) = P(n, n), mpmath
        let expected = [(1, 0.632_120_558_828_557_68), (2, 0.593_994_150_290_161_92), (5, 0.559_506_714_934_787_59)];
        for (n, p) in expected {
            let z = intensity.inverse(f64::from(n));
            assert!((cdf_zn(&net, &fading, idx(n), z).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn interference_cdf_complements_zn_cdf() {
        let (net, fading) = (net(), fading());
        for n in [1, 2, 5] {
            for k in -12..=-4 {
                let x = 10f64.powf(f64::from(k) * 0.8);
                let a = cdf_in(&net, &fading, idx(n), x).unwrap();
                let b = cdf_zn(&net, &fading, idx(n), 1.0 / x).unwrap();
                assert!((a + b - 1.0).abs() < 1e-13);
                assert!((0.0..=1.0).contains(&a));
            }
            assert!(cdf_in(&net, &fading, idx(n), 1e30).unwrap() > 1.0 - 1e-12);
        }
        assert!(cdf_in(&net, &fading, idx(1), 0.0).is_err());
    }

    #[test]
    fn mean_in_examples() {
        let (net, fading) = (net(), fading());
        assert!(matches!(mean_in(&net, &fading, idx(1)), Err(Error::MomentDoesNotExist { .. })));
        // (π/4 · h̄ · 1e-4 / 2)^{3/2} Γ(1/2) / Γ(2), mpmath
        let got = mean_in(&net, &fading, idx(2)).unwrap();
        assert!((got - 4.024_906_005_073_884_2e-7).abs() < 1e-12 * 4.0e-7 * 10.0);
        let mut prev = got;
        for n in 3..8 {
            let cur = mean_in(&net, &fading, idx(n)).unwrap();
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn mean_in_scaling_in_density_and_angle() {
        let (net, fading) = (net(), fading());
        let base = mean_in(&net, &fading, idx(3)).unwrap();
        let dense = mean_in(&net.with_lambda(4e-4).unwrap(), &fading, idx(3)).unwrap();
        assert!((dense / base - 4f64.powf(1.5)).abs() < 1e-12);
        let mut prev = 0.0;
        for phi in [PI / 8.0, PI / 4.0, PI / 2.0, PI, 2.0 * PI] {
            let v = mean_in(&net.with_phi(phi).unwrap(), &fading, idx(3)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn mean_zn_examples() {
        let (net, fading) = (net(), fading());
        let z1 = mean_zn(&net, &fading, idx(1)).unwrap();
        assert!((z1 / 5_854_036.062_511_956 - 1.0).abs() < 1e-12);
        for n in 1..6 {
            let ratio = mean_zn(&net, &fading, idx(n + 1)).unwrap() / mean_zn(&net, &fading, idx(n)).unwrap();
            let expected = (f64::from(n) + 1.5) / f64::from(n);
            assert!((ratio - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn transformed_point_is_unit_gamma() {
        let (net, fading) = (net(), fading());
        let intensity = PowerIntensity::new(&net, &fading);
        for n in [1, 2, 5] {
            let one = gamma_weighted_expectation(|_| 1.0, n, &net, &fading).unwrap();
            assert!((one.value - 1.0).abs() < 1e-12);
            let m = gamma_weighted_expectation(|z| intensity.measure(z).unwrap(), n, &net, &fading).unwrap();
            assert!((m.value - f64::from(n)).abs() < 1e-6);
            let z = gamma_weighted_expectation(|z| z, n, &net, &fading).unwrap();
            let exact = mean_zn(&net, &fading, idx(n)).unwrap();
            assert!((z.value / exact - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn stochastic_dominance_between_ranks() {
        let (net, fading) = (net(), fading());
        for n in 1..6 {
            for k in 0..40 {
                let x = 1e-10 * 1.5f64.powi(k);
                let lo = cdf_in(&net, &fading, idx(n), x).unwrap();
                let hi = cdf_in(&net, &fading, idx(n + 1), x).unwrap();
                assert!(hi >= lo - 1e-15);
            }
        }
    }
}
