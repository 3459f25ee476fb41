//! Laplace functional of the partial accumulative interference 𝓘(n), the
//! interference left after the n strongest interferers are removed.
//!
//! Conditioned on z_n, L(s|z_n) = exp{C q_{z_n}(s)} with C = φλ h̄_{2/α} / α.
//! Everything here is written in terms of x = s / z_n and the scaled
//! incomplete gamma x^{-a} γ(a, x), which stays finite as s → 0.

use crate::error::{domain, Error, Result};
use crate::model::{FadingModel, NetworkModel, PowerIntensity};
use crate::numerics::{gamma_weighted_expectation, gamma_weighted_expectation_tol, Tolerance};
use crate::order_stats::{mean_zn, DominantIndex};
use crate::specfun::lower_inc_gamma_scaled;
use std::f64::consts::PI;

/// Highest derivative order of L(s|z_n) served by default.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Density below which the upper bound is treated as verified.
pub const DEFAULT_LAMBDA_DENSE: f64 = 1e-3;

/// Arguments of the conditional Laplace functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceQuery {
    s: f64,
    z_n: f64,
    n: DominantIndex,
}

impl LaplaceQuery {
    pub fn new(s: f64, z_n: f64, n: DominantIndex) -> Result<Self> {
        check_s(s)?;
        check_z(z_n)?;
        Ok(Self { s, z_n, n })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn z_n(&self) -> f64 {
        self.z_n
    }

    pub fn n(&self) -> DominantIndex {
        self.n
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(domain("Laplace argument s", s));
    }
    Ok(())
}

fn check_z(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("conditioning point z_n", z));
    }
    Ok(())
}

/// φλ h̄_{2/α} / α.
fn exponent_scale(net: &NetworkModel, fading: &FadingModel) -> f64 {
    2.0 * PowerIntensity::new(net, fading).rate() / net.alpha()
}

/// x^{2/α} γ(-2/α, x) + α/2, the bracket of q_{z_n}(s) / z_n^{2/α}.
fn q_bracket(alpha: f64, x: f64) -> Result<f64> {
    let a = -2.0 / alpha;
    if x < 1.0 {
        // Σ_{j≥1} (-1)^j x^j / (j! (j + a)); the j = 0 term is the α/2 that cancels.
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 1..200 {
            let jf = f64::from(j);
            term *= -x / jf;
            let add = term / (jf + a);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                return Ok(sum);
            }
        }
        return Err(Error::SeriesNotConverged { what: "q bracket", terms: 200 });
    }
    Ok(lower_inc_gamma_scaled(a, x)? + alpha / 2.0)
}

/// q_{z_n}(s) = s^{2/α} γ(-2/α, s/z_n) + (α/2) z_n^{2/α}.
pub fn q_zn(alpha: f64, s: f64, z_n: f64) -> Result<f64> {
    check_s(s)?;
    check_z(z_n)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(z_n.powf(2.0 / alpha) * q_bracket(alpha, s / z_n)?)
}

/// L(s|z_n) = E[e^{-s 𝓘(n)} | z_n].
pub fn laplace_conditional(net: &NetworkModel, fading: &FadingModel, query: &LaplaceQuery) -> Result<f64> {
    let q = q_zn(net.alpha(), query.s, query.z_n)?;
    Ok((exponent_scale(net, fading) * q).exp())
}

/// 1 - L(s|z_n), accurate when s 𝓘(n) is tiny.
pub fn laplace_conditional_complement(net: &NetworkModel, fading: &FadingModel, query: &LaplaceQuery) -> Result<f64> {
    let q = q_zn(net.alpha(), query.s, query.z_n)?;
    Ok(-(exponent_scale(net, fading) * q).exp_m1())
}

/// k-th s-derivative of the exponent g(s) = C q_{z_n}(s):
/// g^{(k)}(s) = (-1)^k C s^{2/α-k} γ(k - 2/α, s/z_n).
///
/// At s = 0 this returns the limit (-1)^k C z_n^{2/α-k} / (k - 2/α).
pub fn g_derivative(net: &NetworkModel, fading: &FadingModel, k: usize, s: f64, z_n: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("g_derivative needs k >= 1".into()));
    }
    check_s(s)?;
    check_z(z_n)?;
    let alpha = net.alpha();
    let b = k as f64 - 2.0 / alpha;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scaled = lower_inc_gamma_scaled(b, s / z_n)?;
    Ok(sign * exponent_scale(net, fading) * z_n.powf(2.0 / alpha - k as f64) * scaled)
}

/// L^{(0)}, …, L^{(k_max)} of L(s|z_n) in s, refusing orders above `max_order`.
pub fn laplace_derivatives(
    net: &NetworkModel,
    fading: &FadingModel,
    k_max: usize,
    s: f64,
    z_n: f64,
    max_order: usize,
) -> Result<Vec<f64>> {
    if k_max > max_order {
        return Err(Error::UnsupportedOrder { order: k_max, max: max_order });
    }
    let g = (1..=k_max).map(|k| g_derivative(net, fading, k, s, z_n)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push((exponent_scale(net, fading) * q_zn(net.alpha(), s, z_n)?).exp());
    // L^{(k+1)} = Σ_j C(k, j) g^{(j+1)} L^{(k-j)}
    for k in 0..k_max {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for j in 0..=k {
            acc += binom * g[j] * out[k - j];
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        out.push(acc);
    }
    Ok(out)
}

/// L^{(k)}(s|z_n) with the default order cap.
pub fn laplace_derivative(net: &NetworkModel, fading: &FadingModel, k: usize, s: f64, z_n: f64) -> Result<f64> {
    Ok(laplace_derivatives(net, fading, k, s, z_n, DEFAULT_MAX_ORDER)?[k])
}

/// E[𝓘(n) | z_n] = φλ h̄_{2/α} z_n^{2/α-1} / (α - 2).
pub fn conditional_mean_partial_interference(net: &NetworkModel, fading: &FadingModel, z_n: f64) -> Result<f64> {
    check_z(z_n)?;
    let alpha = net.alpha();
    Ok(alpha * exponent_scale(net, fading) / (alpha - 2.0) * z_n.powf(2.0 / alpha - 1.0))
}

/// 𝓘̄(n) = 2/(α-2) (φλ h̄_{2/α}/2)^{α/2} Γ(n + 1 - α/2) / Γ(n).
///
/// Infinite when α ≥ 2n + 2, reported as a missing moment.
pub fn mean_partial_interference(net: &NetworkModel, fading: &FadingModel, n: DominantIndex) -> Result<f64> {
    let alpha = net.alpha();
    if !(f64::from(n.get()) + 1.0 - alpha / 2.0 > 0.0) {
        return Err(Error::MomentDoesNotExist { n: n.get(), alpha });
    }
    let intensity = PowerIntensity::new(net, fading);
    let moment = intensity.point_moment(n.get(), 1.0 - alpha / 2.0)?;
    Ok(2.0 * intensity.rate() / (alpha - 2.0) * moment)
}

/// E_{z_n}[L(s|z_n)].
pub fn laplace_unconditional(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let c = exponent_scale(net, fading);
    let alpha = net.alpha();
    let r = gamma_weighted_expectation(|z| (c * q_zn(alpha, s, z).unwrap_or(f64::NAN)).exp(), n.get(), net, fading)?;
    Ok(r.value)
}

/// Complements can sit far below one, so only a relative target makes sense.
const COMPLEMENT_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-10 };

/// 1 - E_{z_n}[L(s|z_n)].
pub fn laplace_unconditional_complement(
    net: &NetworkModel,
    fading: &FadingModel,
    n: DominantIndex,
    s: f64,
) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let c = exponent_scale(net, fading);
    let alpha = net.alpha();
    let r = gamma_weighted_expectation_tol(
        |z| -(c * q_zn(alpha, s, z).unwrap_or(f64::NAN)).exp_m1(),
        n.get(),
        net,
        fading,
        COMPLEMENT_TOL,
    )?;
    Ok(r.value)
}

/// C E_{z_n}[q_{z_n}(s)], the exponent of the Jensen lower bound.
fn mean_exponent(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let alpha = net.alpha();
    let r = gamma_weighted_expectation_tol(
        |z| q_zn(alpha, s, z).unwrap_or(f64::NAN),
        n.get(),
        net,
        fading,
        COMPLEMENT_TOL,
    )?;
    Ok(exponent_scale(net, fading) * r.value)
}

/// Jensen lower bound exp{n + C s^{2/α} E[γ(-2/α, s/z_n)]}.
pub fn lower_bound(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    Ok(mean_exponent(net, fading, n, s)?.exp())
}

/// 1 - lower_bound.
pub fn lower_bound_complement(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    Ok(-mean_exponent(net, fading, n, s)?.exp_m1())
}

/// Whether the density is low enough for [`upper_bound`] to be trusted.
pub fn is_non_dense(net: &NetworkModel, lambda_dense: f64) -> bool {
    net.lambda() <= lambda_dense
}

fn upper_exponent(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    check_s(s)?;
    if !is_non_dense(net, DEFAULT_LAMBDA_DENSE) {
        log::warn!("upper bound at lambda = {} is outside the verified regime", net.lambda());
    }
    let z_bar = mean_zn(net, fading, n)?;
    Ok(exponent_scale(net, fading) * q_zn(net.alpha(), s, z_bar)?)
}

/// exp{C q_{z̄_n}(s)}, with z̄_n the mean of z_n.
///
/// This is an upper bound only where L(s|z_n) is concave in z_n; a warning
/// is logged above [`DEFAULT_LAMBDA_DENSE`].
pub fn upper_bound(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    Ok(upper_exponent(net, fading, n, s)?.exp())
}

/// 1 - upper_bound.
pub fn upper_bound_complement(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, s: f64) -> Result<f64> {
    Ok(-upper_exponent(net, fading, n, s)?.exp_m1())
}

/// ∂²L(s|z)/∂z², the curvature behind the upper bound.
///
/// With x = s/z: ∂q/∂z = (1 - e^{-x}) z^{2/α-1} and
/// ∂²q/∂z² = z^{2/α-2} (e^{-x}(1 - 2/α - x) - (1 - 2/α)).
pub fn conditional_curvature_in_zn(net: &NetworkModel, fading: &FadingModel, s: f64, z_n: f64) -> Result<f64> {
    check_s(s)?;
    check_z(z_n)?;
    let alpha = net.alpha();
    let c = exponent_scale(net, fading);
    let x = s / z_n;
    let b = 1.0 - 2.0 / alpha;
    let dq = -(-x).exp_m1() * z_n.powf(-b);
    let d2q = z_n.powf(-b - 1.0) * (b * (-x).exp_m1() - x * (-x).exp());
    let l = (c * q_zn(alpha, s, z_n)?).exp();
    Ok(l * c * (c * dq * dq + d2q))
}

/// Radius R of an exclusion disc such that the omni-directional mean
/// interference outside it, 2πλ h̄ R^{2-α} / (α - 2), equals 𝓘̄(n).
pub fn equivalent_exclusion_radius(net: &NetworkModel, fading: &FadingModel, n: DominantIndex) -> Result<f64> {
    let alpha = net.alpha();
    let target = mean_partial_interference(net, fading, n)?;
    let scale = 2.0 * PI * net.lambda() * fading.mean_gain() / (alpha - 2.0);
    Ok((target / scale).powf(1.0 / (2.0 - alpha)))
}

/// Mean omni-directional interference from outside a disc of radius `r`.
pub fn omni_mean_outside(net: &NetworkModel, fading: &FadingModel, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain("exclusion radius", r));
    }
    let alpha = net.alpha();
    Ok(2.0 * PI * net.lambda() * fading.mean_gain() * r.powf(2.0 - alpha) / (alpha - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::find_root;
    use crate::order_stats::pdf_zn;
    use proptest::prelude::*;

    fn net() -> NetworkModel {
        NetworkModel::new(1e-4, 3.0, PI / 4.0).unwrap()
    }

    fn fading() -> FadingModel {
        FadingModel::new(2.0, 1.0).unwrap()
    }

    fn idx(n: u32) -> DominantIndex {
        DominantIndex::new(n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_zn(3.0, 0.0, 5.0).unwrap(), 0.0);
        for k in [0.1, 1.0, 10.0] {
            assert!(q_zn(3.0, k * 7.0, 7.0).unwrap() < 0.0);
        }
        // α = 4, s = z: z^{1/2} (γ(-1/2, 1) + 2), γ from mpmath
        let z = 9.0;
        let expected = 3.0 * (-3.723_055_413_592_592_7 + 2.0);
        assert!(rel(q_zn(4.0, z, z).unwrap(), expected) < 1e-13);
        assert!(q_zn(3.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn q_series_and_incomplete_gamma_agree_at_switch() {
        for alpha in [2.5, 3.0, 4.0, 5.5] {
            let a = -2.0 / alpha;
            for x in [0.5, 0.99, 1.01, 2.0] {
                let series = q_bracket(alpha, x).unwrap();
                let direct = lower_inc_gamma_scaled(a, x).unwrap() + alpha / 2.0;
                assert!((series - direct).abs() < 1e-12 * direct.abs().max(1e-3), "α={alpha} x={x}");
            }
        }
        // small-x limit: q ≈ -z^{2/α} x / (1 - 2/α)
        let x = 1e-12;
        assert!(rel(q_bracket(3.0, x).unwrap(), -x / (1.0 - 2.0 / 3.0)) < 1e-10);
    }

    #[test]
    fn conditional_laplace_is_a_laplace_transform() {
        let (net, fading) = (net(), fading());
        let z = mean_zn(&net, &fading, idx(1)).unwrap();
        let one = LaplaceQuery::new(0.0, z, idx(1)).unwrap();
        assert_eq!(laplace_conditional(&net, &fading, &one).unwrap(), 1.0);
        let mut prev = 1.0;
        for k in 0..30 {
            let s = z * 1e-3 * 1.6f64.powi(k);
            let v = laplace_conditional(&net, &fading, &LaplaceQuery::new(s, z, idx(1)).unwrap()).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        let sparse = net.with_lambda(1e-14).unwrap();
        let q = LaplaceQuery::new(z, z, idx(1)).unwrap();
        assert!(laplace_conditional(&sparse, &fading, &q).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn first_exponent_derivative_matches_finite_difference() {
        let (net, fading) = (net(), fading());
        let z = mean_zn(&net, &fading, idx(2)).unwrap();
        let c = exponent_scale(&net, &fading);
        for s in [0.3 * z, z, 4.0 * z] {
            let h = 1e-5 * s;
            let g = |s: f64| c * q_zn(3.0, s, z).unwrap();
            let fd = (g(s + h) - g(s - h)) / (2.0 * h);
            let exact = g_derivative(&net, &fading, 1, s, z).unwrap();
            assert!(exact < 0.0);
            assert!(rel(exact, fd) < 1e-5);
            let g1 = |s: f64| g_derivative(&net, &fading, 1, s, z).unwrap();
            let fd2 = (g1(s + h) - g1(s - h)) / (2.0 * h);
            assert!(rel(g_derivative(&net, &fading, 2, s, z).unwrap(), fd2) < 1e-4);
        }
    }

    #[test]
    fn derivative_at_origin_is_minus_conditional_mean() {
        let (net, fading) = (net(), fading());
        for n in [1, 3] {
            let z = mean_zn(&net, &fading, idx(n)).unwrap();
            let d = laplace_derivative(&net, &fading, 1, 0.0, z).unwrap();
            let mean = conditional_mean_partial_interference(&net, &fading, z).unwrap();
            assert!(rel(-d, mean) < 1e-13);
            // and the continuous limit from the right
            let near = laplace_derivative(&net, &fading, 1, 1e-9 * z, z).unwrap();
            assert!(rel(near, d) < 1e-6);
        }
    }

    #[test]
    fn derivative_recurrence_examples() {
        let (net, fading) = (net(), fading());
        let z = mean_zn(&net, &fading, idx(1)).unwrap();
        let s = 1.0 / z;
        let q = LaplaceQuery::new(s, z, idx(1)).unwrap();
        let l = laplace_conditional(&net, &fading, &q).unwrap();
        assert_eq!(laplace_derivative(&net, &fading, 0, s, z).unwrap(), l);
        let chain = l * g_derivative(&net, &fading, 1, s, z).unwrap();
        assert!(rel(laplace_derivative(&net, &fading, 1, s, z).unwrap(), chain) < 1e-14);

        // third derivative against a finite difference of the second, at a
        // scale where L actually moves
        let s = z;
        let h = 1e-4 * s;
        let l2 = |s: f64| laplace_derivative(&net, &fading, 2, s, z).unwrap();
        let fd = (l2(s + h) - l2(s - h)) / (2.0 * h);
        assert!(rel(laplace_derivative(&net, &fading, 3, s, z).unwrap(), fd) < 1e-3);

        assert!(matches!(
            laplace_derivative(&net, &fading, 9, s, z),
            Err(Error::UnsupportedOrder { order: 9, max: 8 })
        ));
        assert!(laplace_derivatives(&net, &fading, 9, s, z, 12).is_ok());
    }

    proptest! {
        #[test]
        fn completely_monotone(sigma in 1e-3f64..20.0, zeta in 0.05f64..20.0, alpha in 2.2f64..5.0) {
            let net = NetworkModel::new(1e-4, alpha, PI / 3.0).unwrap();
            let fading = fading();
            let z = zeta * mean_zn(&net, &fading, idx(1)).unwrap();
            let d = laplace_derivatives(&net, &fading, 4, sigma * z, z, DEFAULT_MAX_ORDER).unwrap();
            // far in the tail L underflows to zero, which is still a valid sign
            prop_assert!(d[0] >= 0.0 && d[0] <= 1.0);
            for (k, v) in d.iter().enumerate() {
                let signed = if k % 2 == 0 { *v } else { -*v };
                prop_assert!(signed >= 0.0, "k={} value {}", k, v);
            }
        }

        #[test]
        fn depends_on_phi_lambda_product(sigma in 1e-3f64..10.0, n in 1u32..5) {
            let a = net();
            let b = NetworkModel::new(a.lambda() / 2.0, a.alpha(), 2.0 * a.phi()).unwrap();
            let f = fading();
            let z = mean_zn(&a, &f, idx(n)).unwrap();
            prop_assert!(rel(mean_zn(&b, &f, idx(n)).unwrap(), z) < 1e-12);
            let s = sigma * z;
            let q = LaplaceQuery::new(s, z, idx(n)).unwrap();
            prop_assert!(rel(laplace_conditional(&a, &f, &q).unwrap(), laplace_conditional(&b, &f, &q).unwrap()) < 1e-12);
            prop_assert!(rel(g_derivative(&a, &f, 2, s, z).unwrap(), g_derivative(&b, &f, 2, s, z).unwrap()) < 1e-12);
            prop_assert!(rel(mean_partial_interference(&a, &f, idx(n)).unwrap(), mean_partial_interference(&b, &f, idx(n)).unwrap()) < 1e-12);
            prop_assert!(rel(laplace_unconditional(&a, &f, idx(n), s).unwrap(), laplace_unconditional(&b, &f, idx(n), s).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn mean_partial_interference_examples() {
        let (net, fading) = (net(), fading());
        // 2 (h̄_{2/3} π/4 1e-4 / 2)^{3/2} Γ(1/2), mpmath
        let i1 = mean_partial_interference(&net, &fading, idx(1)).unwrap();
        assert!(rel(i1, 8.049_812_010_147_768_5e-7) < 1e-12);
        for n in 1..6 {
            let a = mean_partial_interference(&net, &fading, idx(n)).unwrap();
            let b = mean_partial_interference(&net, &fading, idx(n + 1)).unwrap();
            assert!(rel(b / a, (f64::from(n) + 1.0 - 1.5) / f64::from(n)) < 1e-12);
        }
        let steep = NetworkModel::new(1e-4, 4.5, PI).unwrap();
        assert!(mean_partial_interference(&steep, &fading, idx(1)).is_err());
        assert!(mean_partial_interference(&steep, &fading, idx(2)).is_ok());
    }

    #[test]
    fn conditional_mean_integrates_to_mean() {
        let (net, fading) = (net(), fading());
        for n in 1..=5 {
            let mean = mean_partial_interference(&net, &fading, idx(n)).unwrap();
            // integrate E[𝓘(n)|z] f(z) in ln z, independent of the Gamma substitution
            let intensity = PowerIntensity::new(&net, &fading);
            let lo = intensity.inverse(1e-14).ln();
            let hi = intensity.inverse(f64::from(n) + 80.0).ln();
            let mut f = |u: f64| {
                let z = u.exp();
                conditional_mean_partial_interference(&net, &fading, z).unwrap()
                    * pdf_zn(&net, &fading, idx(n), z).unwrap()
                    * z
            };
            let r = crate::numerics::adaptive_kronrod(&mut f, lo, hi, Tolerance::relative(1e-10), 4000);
            assert!(rel(r.value, mean) < 1e-6, "n={n}: {} vs {mean}", r.value);
        }
    }

    #[test]
    fn unconditional_limits_and_complement() {
        let (net, fading) = (net(), fading());
        assert_eq!(laplace_unconditional(&net, &fading, idx(2), 0.0).unwrap(), 1.0);
        for n in [1, 3] {
            let z = mean_zn(&net, &fading, idx(n)).unwrap();
            for sigma in [0.5, 1.0, 2.0] {
                let l = laplace_unconditional(&net, &fading, idx(n), sigma * z).unwrap();
                let c = laplace_unconditional_complement(&net, &fading, idx(n), sigma * z).unwrap();
                assert!(l > 0.0 && l < 1.0);
                assert!((l + c - 1.0).abs() < 1e-9);
            }
        }
        // 1 - L = s 𝓘̄(n) - (heavier-order term). 𝓘(1) contains I_2 whose tail
        // index is 4/3, so the relative remainder scales as s^{1/3}; 𝓘(3)
        // has a finite variance and the remainder is negligible.
        let gap = |n: u32, s: f64| {
            let c = laplace_unconditional_complement(&net, &fading, idx(n), s).unwrap();
            rel(c, s * mean_partial_interference(&net, &fading, idx(n)).unwrap())
        };
        let z1 = mean_zn(&net, &fading, idx(1)).unwrap();
        for k in 0..4 {
            let s = 1e-3 / z1 * 10f64.powi(k);
            assert!(rel(gap(1, 10.0 * s) / gap(1, s), 10f64.powf(1.0 / 3.0)) < 1e-3);
        }
        let z3 = mean_zn(&net, &fading, idx(3)).unwrap();
        assert!(gap(3, 1e-3 / z3) < 1e-6);
    }

    #[test]
    fn lower_bound_forms_agree() {
        let (net, fading) = (net(), fading());
        let c = exponent_scale(&net, &fading);
        let alpha = net.alpha();
        for n in [1, 3] {
            let s = mean_zn(&net, &fading, idx(n)).unwrap();
            let e_gamma = gamma_weighted_expectation(
                |z| crate::specfun::lower_inc_gamma(-2.0 / alpha, s / z).unwrap(),
                n,
                &net,
                &fading,
            )
            .unwrap()
            .value;
            let textbook = (f64::from(n) + c * s.powf(2.0 / alpha) * e_gamma).exp();
            assert!(rel(lower_bound(&net, &fading, idx(n), s).unwrap(), textbook) < 1e-7);
        }
        assert_eq!(lower_bound(&net, &fading, idx(1), 0.0).unwrap(), 1.0);
        assert_eq!(upper_bound(&net, &fading, idx(1), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn sandwich_on_small_arguments() {
        let (net, fading) = (net(), fading());
        for n in [1, 3] {
            let z = mean_zn(&net, &fading, idx(n)).unwrap();
            for sigma in [0.5, 1.0, 2.0] {
                let s = sigma / z;
                let unc = laplace_unconditional_complement(&net, &fading, idx(n), s).unwrap();
                let lo = lower_bound_complement(&net, &fading, idx(n), s).unwrap();
                let hi = upper_bound_complement(&net, &fading, idx(n), s).unwrap();
                // complements reverse the order
                assert!(hi <= unc * (1.0 + 1e-9) && unc <= lo * (1.0 + 1e-9), "n={n} σ={sigma}");
            }
        }
    }

    #[test]
    fn bounds_on_scale_free_grid_match_reference() {
        // (n, σ, lower, unconditional, upper) at s = σ z̄_n, mpmath
        let table = [
            (1, 0.5, 0.246_328_622_671_901_95, 0.266_525_297_758_044_2, 0.319_804_983_433_525_37),
            (1, 1.0, 0.084_313_163_841_738_72, 0.098_752_138_507_518_67, 0.114_796_016_202_019_5),
            (1, 2.0, 0.013_972_303_215_097_676, 0.018_648_749_733_368_372, 0.018_964_848_071_056_28),
            (3, 0.5, 0.034_922_298_226_766_03, 0.044_304_736_988_195_39, 0.047_378_736_909_858_755),
            (3, 1.0, 0.002_103_708_491_147_570_2, 0.003_572_228_942_451_495, 0.003_057_269_038_259_047_5),
            (3, 2.0, 1.723_951_528_279_162_7e-5, 4.806_216_047_606_934_5e-5, 2.474_961_553_097_623_2e-5),
        ];
        let (net, fading) = (net(), fading());
        for (n, sigma, lo, unc, up) in table {
            let s = sigma * mean_zn(&net, &fading, idx(n)).unwrap();
            assert!(rel(lower_bound(&net, &fading, idx(n), s).unwrap(), lo) < 1e-8);
            assert!(rel(laplace_unconditional(&net, &fading, idx(n), s).unwrap(), unc) < 1e-8);
            assert!(rel(upper_bound(&net, &fading, idx(n), s).unwrap(), up) < 1e-10);
        }
        // The lower bound always holds. The upper bound needs L(s|z) concave in z
        // over the bulk of z_n, which fails once s is comparable to z̄_n and n > 1.
        let z3 = mean_zn(&net, &fading, idx(3)).unwrap();
        assert!(
            upper_bound(&net, &fading, idx(3), z3).unwrap() < laplace_unconditional(&net, &fading, idx(3), z3).unwrap()
        );
    }

    #[test]
    fn lower_bound_tightens_with_rank() {
        let (net, fading) = (net(), fading());
        let s = mean_zn(&net, &fading, idx(1)).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=6 {
            let unc = laplace_unconditional(&net, &fading, idx(n), s).unwrap();
            let lo = lower_bound(&net, &fading, idx(n), s).unwrap();
            assert!(lo <= unc + 1e-10);
            let gap = (unc - lo) / unc;
            assert!(gap < prev, "n={n}");
            prev = gap;
        }
    }

    #[test]
    fn curvature_matches_finite_difference_and_is_negative_past_mean() {
        let (net, fading) = (net(), fading());
        let z1 = mean_zn(&net, &fading, idx(1)).unwrap();
        for sigma in [0.5, 1.0, 2.0] {
            let s = sigma / z1;
            for k in 0..20 {
                let z = z1 * 1.3f64.powi(k);
                let h = 1e-3 * z;
                let l = |z: f64| {
                    laplace_conditional_complement(&net, &fading, &LaplaceQuery::new(s, z, idx(1)).unwrap()).unwrap()
                };
                // L = 1 - complement, so its second difference is minus the complement's
                let fd = -(l(z + h) - 2.0 * l(z) + l(z - h)) / (h * h);
                let exact = conditional_curvature_in_zn(&net, &fading, s, z).unwrap();
                assert!(exact <= 0.0 && fd <= 0.0, "σ={sigma} z={z}");
                assert!(rel(exact, fd) < 1e-3);
            }
        }
    }

    #[test]
    fn exclusion_radius_identity() {
        let (net, fading) = (net(), fading());
        for n in 1..=5 {
            let r = equivalent_exclusion_radius(&net, &fading, idx(n)).unwrap();
            let mean = mean_partial_interference(&net, &fading, idx(n)).unwrap();
            assert!(rel(omni_mean_outside(&net, &fading, r).unwrap(), mean) < 1e-10);
            let root = find_root(|r| (omni_mean_outside(&net, &fading, r).unwrap() / mean).ln(), 1.0, 1e6).unwrap();
            assert!(rel(root, r) < 1e-8);
        }
        // mpmath
        let r1 = equivalent_exclusion_radius(&net, &fading, idx(1)).unwrap();
        assert!(rel(r1, 780.538_141_668_260_84) < 1e-12);
        let r3 = equivalent_exclusion_radius(&net, &fading, idx(3)).unwrap();
        assert!(rel(r3, 2_081.435_044_448_695_6) < 1e-12);
    }
}
