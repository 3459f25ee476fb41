//! Analytic-versus-simulation checks behind `domint verify`.
//!
//! Each criterion returns a pass flag plus human-readable detail lines.
//! Simulation ensembles are shared between criteria through
//! [`VerifyContext`], so the expensive runs happen once.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::laplace::{
    conditional_curvature_in_zn, conditional_mean_partial_interference, equivalent_exclusion_radius, g_derivative,
    laplace_conditional, laplace_conditional_complement, laplace_derivatives, laplace_unconditional,
    laplace_unconditional_complement, lower_bound, lower_bound_complement, mean_partial_interference,
    omni_mean_outside, upper_bound, upper_bound_complement, LaplaceQuery,
};
use crate::model::{FadingModel, LinkModel, NetworkModel, PowerIntensity};
use crate::numerics::{adaptive_kronrod, find_root, Tolerance};
use crate::order_stats::{cdf_in, cdf_zn, mean_in, mean_zn, pdf_zn, DominantIndex};
use crate::reliability::{
    link_error_prob, minimum_rate, outage_probability, qos_feasibility, queue_violation_prob, total_error,
    total_error_q_sweep, QosSpec, DEFAULT_RATE_CAP,
};
use crate::simulator::{
    sector_tail_mean, window_radius_for_tolerance, Ensemble, MeanEstimate, SimConfig, Simulator, Window,
};
use crate::specfun::{lower_inc_gamma, lower_inc_gamma_kummer};

/// Pass thresholds of the acceptance criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub sup_norm: f64,
    pub dominant_mean_rel: f64,
    pub partial_mean_rel: f64,
    pub identity_rel: f64,
    pub laplace_rel: f64,
    pub conditional_rel: f64,
    pub omni_rel: f64,
    pub radius_identity_rel: f64,
    pub outage_abs: f64,
    pub root_gap: f64,
    pub optimizer_abs: f64,
    pub pdf_norm: f64,
    pub dual_route_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sup_norm: 0.02,
            dominant_mean_rel: 0.03,
            partial_mean_rel: 0.05,
            identity_rel: 1e-6,
            laplace_rel: 0.01,
            conditional_rel: 0.02,
            omni_rel: 0.05,
            radius_identity_rel: 1e-10,
            outage_abs: 0.02,
            root_gap: 1e-9,
            optimizer_abs: 1e-6,
            pdf_norm: 1e-6,
            dual_route_rel: 1e-10,
        }
    }
}

/// Trial counts, seed, link and QoS setting of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub seed: u64,
    pub cdf_trials: usize,
    pub outage_trials: usize,
    pub omni_trials: usize,
    pub link_distance: f64,
    pub qos: QosSpec,
    pub thresholds: Thresholds,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 1,
            cdf_trials: 100_000,
            outage_trials: 10_000,
            omni_trials: 20_000,
            link_distance: 80.0,
            qos: QosSpec::new(20.0, 0.1, 0.14).expect("valid default QoS"),
            thresholds: Thresholds::default(),
        }
    }
}

/// Checks allowed to fail: plain sample means of I_2, whose variance is
/// infinite at α = 3. Each is paired with a truncated-mean check that must
/// still pass.
pub const TOLERATED_FAILURES: [(u8, &str); 2] = [(2, "n=2"), (3, "n=1")];

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Labels of the individual checks that failed.
    pub failures: Vec<String>,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl CriterionResult {
    /// Failed checks outside [`TOLERATED_FAILURES`].
    pub fn unexplained_failures(&self) -> Vec<&str> {
        self.failures
            .iter()
            .map(String::as_str)
            .filter(|label| !TOLERATED_FAILURES.contains(&(self.id, label)))
            .collect()
    }

    /// One-line summary: `criterion 3 PASS partial sums ... (1.2 s)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} {} {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        )
    }
}

/// The paper's reference network: λ = 1e-4, α = 3, φ = π/4.
pub fn reference_network() -> NetworkModel {
    NetworkModel::new(1e-4, 3.0, PI / 4.0).expect("valid reference network")
}

/// Nakagami m = 2, Ω = 1.
pub fn reference_fading() -> FadingModel {
    FadingModel::new(2.0, 1.0).expect("valid reference fading")
}

/// Sector angles of the outage sweep.
pub const PHI_SWEEP: [f64; 5] = [PI / 8.0, PI / 4.0, PI / 2.0, PI, 2.0 * PI];

/// Probability mass of z_n cut away by the truncated-mean checks.
const TRUNCATION_MASS: f64 = 1e-3;

/// z with P(z_n < z) = p.
fn lower_quantile_zn(net: &NetworkModel, fading: &FadingModel, n: DominantIndex, p: f64) -> Result<f64> {
    let intensity = PowerIntensity::new(net, fading);
    let lo = intensity.inverse(1e-12).ln();
    let hi = intensity.inverse(f64::from(n.get()) + 60.0).ln();
    let u = find_root(|u| cdf_zn(net, fading, n, u.exp()).unwrap_or(f64::NAN) - p, lo, hi)?;
    Ok(u.exp())
}

/// E[h(z_n); z_n ≥ z_cut].
fn truncated_expectation<H: Fn(f64) -> f64>(
    net: &NetworkModel,
    fading: &FadingModel,
    n: DominantIndex,
    z_cut: f64,
    h: H,
) -> f64 {
    let hi = PowerIntensity::new(net, fading).inverse(f64::from(n.get()) + 80.0).ln();
    let mut f = |u: f64| {
        let z = u.exp();
        h(z) * pdf_zn(net, fading, n, z).unwrap_or(f64::NAN) * z
    };
    adaptive_kronrod(&mut f, z_cut.ln(), hi, Tolerance::relative(1e-11), 4000).value
}

/// Failed check labels and detail lines gathered by one criterion.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    details: Vec<String>,
}

impl Outcome {
    fn check(&mut self, pass: bool, label: impl Into<String>, detail: impl Into<String>) {
        if !pass {
            self.failures.push(label.into());
        }
        self.details.push(detail.into());
    }

    fn note(&mut self, detail: impl Into<String>) {
        self.details.push(detail.into());
    }
}

/// Settings plus lazily built simulation ensembles.
pub struct VerifyContext {
    pub settings: VerifySettings,
    reference: OnceLock<Ensemble>,
}

impl VerifyContext {
    pub fn new(settings: VerifySettings) -> Self {
        Self { settings, reference: OnceLock::new() }
    }

    /// 10⁵-trial run at the reference parameters, shared by criteria 1–4.
    pub fn reference_ensemble(&self) -> Result<&Ensemble> {
        if let Some(e) = self.reference.get() {
            return Ok(e);
        }
        let config = SimConfig::new(self.settings.cdf_trials, self.settings.seed);
        let ens = Simulator::new(&reference_network(), &reference_fading(), &config)?.run();
        Ok(self.reference.get_or_init(|| ens))
    }

    pub fn run(&self, id: u8) -> Result<CriterionResult> {
        let start = Instant::now();
        let (title, outcome) = match id {
            1 => ("dominant interference CDF vs simulation", self.dominant_cdf()),
            2 => ("mean of the n-th dominant power", self.dominant_means()),
            3 => ("mean partial interference", self.partial_means()),
            4 => ("Laplace functional vs simulation", self.laplace_values()),
            5 => ("Laplace bounds and concavity", self.bounds()),
            6 => ("omni-directional exclusion radius", self.exclusion_radius()),
            7 => ("outage probability sweep", self.outage()),
            8 => ("QoS rate selection", self.qos()),
            9 => ("property suites", self.properties()),
            _ => return Err(crate::error::Error::InvalidParameter(format!("no criterion {id}"))),
        };
        let Outcome { failures, details } = outcome?;
        Ok(CriterionResult {
            id,
            title,
            passed: failures.is_empty(),
            failures,
            details,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn run_all(&self) -> Result<Vec<CriterionResult>> {
        (1..=9).map(|id| self.run(id)).collect()
    }

    fn dominant_cdf(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let limit = self.settings.thresholds.sup_norm;
        let start = Instant::now();
        let ens = self.reference_ensemble()?;
        let mut out = Outcome::default();
        out.note(format!("{} trials simulated in {:.1} s", ens.trials().len(), start.elapsed().as_secs_f64()));
        for n in [1, 2, 5] {
            let idx = DominantIndex::new(n)?;
            let ecdf = ens.dominant_cdf(idx)?;
            let d = ecdf.sup_distance(|x| cdf_in(&net, &fading, idx, x).unwrap_or(f64::NAN));
            out.check(
                d <= limit,
                format!("n={n}"),
                format!("n={n}: sup distance {d:.4} (limit {limit}), censored {}", ecdf.censored),
            );
        }
        Ok(out)
    }

    fn dominant_means(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let ens = self.reference_ensemble()?;
        let limit = self.settings.thresholds.dominant_mean_rel;
        let mut out = Outcome::default();
        for n in 2..=6u32 {
            let idx = DominantIndex::new(n)?;
            let k = n as usize;
            let exact = mean_in(&net, &fading, idx)?;
            let mc = ens.dominant_mean(idx)?;
            let rel = (mc.mean - exact).abs() / exact;
            let (lo, hi) = mc.ci95();
            out.check(
                mc.covers(exact) && rel <= limit,
                format!("n={n}"),
                format!(
                    "n={n}: analytic {exact:.6e}, simulated {:.6e} (95% CI [{lo:.6e}, {hi:.6e}]), rel {rel:.4}",
                    mc.mean
                ),
            );

            // same comparison below the analytic 0.999 quantile, where the variance is finite
            let z_cut = lower_quantile_zn(&net, &fading, idx, TRUNCATION_MASS)?;
            let truncated = truncated_expectation(&net, &fading, idx, z_cut, |z| 1.0 / z);
            let mc = MeanEstimate::from_values(ens.trials().iter().filter(|t| t.explicit_count >= k).map(|t| {
                let x = t.top[k - 1];
                if 1.0 / x >= z_cut {
                    x
                } else {
                    0.0
                }
            }));
            let rel = (mc.mean - truncated).abs() / truncated;
            out.check(
                rel <= limit,
                format!("n={n} truncated"),
                format!(
                    "n={n} below the 0.999 quantile: analytic {truncated:.6e}, simulated {:.6e}, rel {rel:.4}, {:+.1} standard errors",
                    mc.mean,
                    (mc.mean - truncated) / mc.std_error
                ),
            );
        }
        Ok(out)
    }

    fn partial_means(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let ens = self.reference_ensemble()?;
        let t = self.settings.thresholds;
        let intensity = PowerIntensity::new(&net, &fading);
        let window = SimConfig::new(1, 0).window;
        let outer = match window {
            Window::Radius(r) => r,
            Window::TailTolerance(tol) => window_radius_for_tolerance(&net, &fading, tol)?,
        };
        let omitted = sector_tail_mean(&net, &fading, outer);
        let mut out = Outcome::default();
        out.note(format!("mean interference beyond the simulation window: {omitted:.3e}"));
        for n in 1..=5u32 {
            let idx = DominantIndex::new(n)?;
            let exact = mean_partial_interference(&net, &fading, idx)?;
            let mc = ens.partial_sum_mean(n as usize)?;
            let rel = (mc.mean - exact).abs() / exact;
            out.check(
                rel <= t.partial_mean_rel,
                format!("n={n}"),
                format!(
                    "n={n}: analytic {exact:.6e}, simulated {:.6e} ± {:.1e}, rel {rel:.4}",
                    mc.mean,
                    1.96 * mc.std_error
                ),
            );

            // ∫ E[𝓘(n)|z] f(z) dz in ln z, independent of the Gamma substitution
            let lo = intensity.inverse(1e-14).ln();
            let hi = intensity.inverse(f64::from(n) + 80.0).ln();
            let mut integrand = |u: f64| {
                let z = u.exp();
                conditional_mean_partial_interference(&net, &fading, z).unwrap_or(f64::NAN)
                    * pdf_zn(&net, &fading, idx, z).unwrap_or(f64::NAN)
                    * z
            };
            let q = adaptive_kronrod(&mut integrand, lo, hi, Tolerance::relative(1e-11), 4000);
            let identity = (q.value - exact).abs() / exact;
            out.check(
                identity <= t.identity_rel,
                format!("n={n} identity"),
                format!("n={n}: quadrature identity rel {identity:.1e}"),
            );

            // truncate on I_{n+1} below its 0.999 quantile: 𝓘(n) = I_{n+1} + 𝓘(n+1)
            let next = idx.next();
            let z_cut = lower_quantile_zn(&net, &fading, next, TRUNCATION_MASS)?;
            let truncated = truncated_expectation(&net, &fading, next, z_cut, |z| {
                1.0 / z + conditional_mean_partial_interference(&net, &fading, z).unwrap_or(f64::NAN)
            });
            let k = n as usize;
            let mc = MeanEstimate::from_values(ens.trials().iter().filter(|t| t.explicit_count > k).map(|t| {
                if 1.0 / t.top[k] >= z_cut {
                    t.partial[k]
                } else {
                    0.0
                }
            }));
            // the simulation omits the mean beyond its window on the kept event
            let in_window = truncated - (1.0 - TRUNCATION_MASS) * omitted;
            let rel = (mc.mean - truncated).abs() / truncated;
            out.check(
                rel <= t.partial_mean_rel,
                format!("n={n} truncated"),
                format!(
                    "n={n} with I_{} below its 0.999 quantile: analytic {truncated:.6e} ({in_window:.6e} inside the window), simulated {:.6e}, rel {rel:.4}, {:+.1} standard errors from the in-window value",
                    n + 1,
                    mc.mean,
                    (mc.mean - in_window) / mc.std_error
                ),
            );
        }
        Ok(out)
    }

    fn laplace_values(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let ens = self.reference_ensemble()?;
        let t = self.settings.thresholds;
        let mut out = Outcome::default();
        for n in [1u32, 3] {
            let idx = DominantIndex::new(n)?;
            let z_bar = mean_zn(&net, &fading, idx)?;
            for sigma in [0.5, 1.0, 2.0] {
                let s = sigma / z_bar;
                let exact = laplace_unconditional(&net, &fading, idx, s)?;
                let mc = ens.laplace(n as usize, s)?;
                let rel = (mc.mean - exact).abs() / exact;
                let cond = self.conditional_check(ens, &net, &fading, idx, s, z_bar)?;
                out.check(
                    rel <= t.laplace_rel && cond.0 <= t.conditional_rel,
                    format!("n={n} σ={sigma}"),
                    format!(
                        "n={n} s={sigma}/z̄: unconditional {exact:.15} vs {:.15} (rel {rel:.1e}); conditional {:.15} vs {:.15} over {} samples (rel {:.1e})",
                        mc.mean, cond.1, cond.2, cond.3, cond.0
                    ),
                );
            }
        }
        // s = σ z̄_n, where the transform is far from 1; reported, not gated
        for n in [1u32, 3] {
            let idx = DominantIndex::new(n)?;
            let z_bar = mean_zn(&net, &fading, idx)?;
            for sigma in [0.5, 1.0, 2.0] {
                let s = sigma * z_bar;
                let exact = laplace_unconditional(&net, &fading, idx, s)?;
                let mc = ens.laplace(n as usize, s)?;
                let cond = self.conditional_check(ens, &net, &fading, idx, s, z_bar)?;
                out.note(format!(
                    "(informational) n={n} s={sigma}·z̄: unconditional {exact:.6} vs {:.6} ({:+.1} standard errors); conditional {:.6} vs {:.6} (rel {:.1e}, {} samples)",
                    mc.mean,
                    (mc.mean - exact) / mc.std_error,
                    cond.1,
                    cond.2,
                    cond.0,
                    cond.3
                ));
            }
        }
        Ok(out)
    }

    /// Binned conditional Laplace: (relative gap, analytic bin average,
    /// simulated mean, samples).
    fn conditional_check(
        &self,
        ens: &Ensemble,
        net: &NetworkModel,
        fading: &FadingModel,
        idx: DominantIndex,
        s: f64,
        z_target: f64,
    ) -> Result<(f64, f64, f64, usize)> {
        let bin = 0.05;
        let mc = ens.conditional_laplace(idx, s, z_target, bin)?;
        // average L(s|z) over the same bin, weighted by the density of z_n
        let (lo, hi) = (z_target * (1.0 - bin), z_target * (1.0 + bin));
        let mut weighted = |z: f64| {
            let l = LaplaceQuery::new(s, z, idx).and_then(|q| laplace_conditional(net, fading, &q)).unwrap_or(f64::NAN);
            l * pdf_zn(net, fading, idx, z).unwrap_or(f64::NAN)
        };
        let mut mass = |z: f64| pdf_zn(net, fading, idx, z).unwrap_or(f64::NAN);
        let tol = Tolerance::relative(1e-10);
        let num = adaptive_kronrod(&mut weighted, lo, hi, tol, 200).value;
        let den = adaptive_kronrod(&mut mass, lo, hi, tol, 200).value;
        let analytic = num / den;
        Ok(((mc.mean - analytic).abs() / analytic, analytic, mc.mean, mc.count))
    }

    fn bounds(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let mut out = Outcome::default();
        for n in [1u32, 3] {
            let idx = DominantIndex::new(n)?;
            let z_bar = mean_zn(&net, &fading, idx)?;
            for sigma in [0.5, 1.0, 2.0] {
                let s = sigma / z_bar;
                // compare 1 - L, which reverses the order; L itself is 1 - O(1e-13)
                let lo = lower_bound_complement(&net, &fading, idx, s)?;
                let mid = laplace_unconditional_complement(&net, &fading, idx, s)?;
                let hi = upper_bound_complement(&net, &fading, idx, s)?;
                let slack = 1e-9 * mid;
                let pass = hi <= mid + slack && mid <= lo + slack;
                out.check(
                    pass,
                    format!("n={n} σ={sigma} sandwich"),
                    format!(
                        "n={n} σ={sigma} s=σ/z̄: 1-L^u {hi:.9e} ≤ 1-L {mid:.9e} ≤ 1-L^l {lo:.9e}: {}",
                        if pass { "ok" } else { "violated" }
                    ),
                );
            }
        }
        // concavity of L(s|z) in z beyond z̄_1, by second differences
        let z1 = mean_zn(&net, &fading, DominantIndex::FIRST)?;
        let mut worst = f64::NEG_INFINITY;
        let mut worst_analytic = f64::NEG_INFINITY;
        for sigma in [0.5, 1.0, 2.0] {
            let s = sigma / z1;
            for k in 0..40 {
                let z = z1 * 1.25f64.powi(k);
                let h = 1e-3 * z;
                let c = |z: f64| {
                    LaplaceQuery::new(s, z, DominantIndex::FIRST)
                        .and_then(|q| laplace_conditional_complement(&net, &fading, &q))
                        .unwrap_or(f64::NAN)
                };
                let second = -(c(z + h) - 2.0 * c(z) + c(z - h)) / (h * h);
                worst = worst.max(second * z * z);
                worst_analytic = worst_analytic.max(conditional_curvature_in_zn(&net, &fading, s, z)?);
            }
        }
        let concave = worst <= 0.0 && worst_analytic <= 0.0;
        out.check(concave, "concavity", format!(
            "concavity for z ≥ z̄_1: max scaled second difference {worst:.3e}, max analytic curvature {worst_analytic:.3e}"
        ));
        // scale-free grid, reported for reference
        for n in [1u32, 3] {
            let idx = DominantIndex::new(n)?;
            let z_bar = mean_zn(&net, &fading, idx)?;
            for sigma in [0.5, 1.0, 2.0] {
                let s = sigma * z_bar;
                let (l, m, u) = (
                    lower_bound(&net, &fading, idx, s)?,
                    laplace_unconditional(&net, &fading, idx, s)?,
                    upper_bound(&net, &fading, idx, s)?,
                );
                out.note(format!(
                    "(informational) n={n} σ={sigma} s=σ·z̄: L^l {l:.6} L {m:.6} L^u {u:.6}{}",
                    if m <= u { "" } else { " -- upper bound does not hold here" }
                ));
            }
        }
        Ok(out)
    }

    fn exclusion_radius(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let t = self.settings.thresholds;
        let omni = net.omnidirectional();
        let mut out = Outcome::default();
        for n in 1..=5u32 {
            let idx = DominantIndex::new(n)?;
            let r = equivalent_exclusion_radius(&net, &fading, idx)?;
            let target = mean_partial_interference(&net, &fading, idx)?;
            let identity = (omni_mean_outside(&net, &fading, r)? - target).abs() / target;
            out.check(
                identity <= t.radius_identity_rel,
                format!("n={n} identity"),
                format!("n={n}: R = {r:.6}, identity rel {identity:.1e}"),
            );
            if n == 1 || n == 3 {
                let config = SimConfig::new(self.settings.omni_trials, self.settings.seed ^ u64::from(n))
                    .with_inner_radius(r)
                    .with_window(Window::TailTolerance(1e-4));
                let mc = Simulator::new(&omni, &fading, &config)?.run().partial_sum_mean(0)?;
                let rel = (mc.mean - target).abs() / target;
                out.check(
                    rel <= t.omni_rel,
                    format!("n={n} omni"),
                    format!(
                        "n={n}: omni simulation outside R {:.6e} ± {:.1e} vs {target:.6e} (rel {rel:.4})",
                        mc.mean,
                        1.96 * mc.std_error
                    ),
                );
            }
        }
        Ok(out)
    }

    fn outage(&self) -> Result<Outcome> {
        let net = reference_network();
        let t = self.settings.thresholds;
        let u = self.settings.link_distance;
        let mut out = Outcome::default();
        let mut analytic = std::collections::BTreeMap::new();
        for m in [1u32, 2] {
            let fading = FadingModel::new(f64::from(m), 1.0)?;
            for (i, &phi) in PHI_SWEEP.iter().enumerate() {
                let sector = net.with_phi(phi)?;
                let config = SimConfig::new(
                    self.settings.outage_trials,
                    self.settings.seed.wrapping_add(100 * u64::from(m) + i as u64),
                );
                let ens = Simulator::new(&sector, &fading, &config)?.run();
                for n in [1u32, 3] {
                    let link = LinkModel::new(u, 1.0, n)?;
                    let a = outage_probability(&sector, &fading, &link)?;
                    let e = ens.outage(&link)?;
                    let gap = (a - e).abs();
                    analytic.insert((m, n, i), a);
                    out.check(
                        gap <= t.outage_abs,
                        format!("m={m} n={n} φ={phi:.4}"),
                        format!("m={m} n={n} φ={phi:.4}: analytic {a:.4}, simulated {e:.4}, gap {gap:.4}"),
                    );
                }
            }
        }
        let increasing = analytic.iter().all(|(&(m, n, i), &v)| i == 0 || v > analytic[&(m, n, i - 1)]);
        let ranks = analytic.iter().all(|(&(m, n, i), &v)| n != 3 || v < analytic[&(m, 1, i)]);
        let sign = |i: usize| (analytic[&(1, 1, i)] - analytic[&(2, 1, i)]).signum();
        let crossover = (1..PHI_SWEEP.len()).any(|i| sign(i) != sign(i - 1));
        out.check(
            increasing && ranks && crossover,
            "trends",
            format!("increasing in φ: {increasing}; n=3 below n=1: {ranks}; Rayleigh/m=2 crossover: {crossover}"),
        );
        Ok(out)
    }

    fn qos(&self) -> Result<Outcome> {
        let (net, fading) = (reference_network(), reference_fading());
        let t = self.settings.thresholds;
        let qos = self.settings.qos;
        let link = LinkModel::new(self.settings.link_distance, 1.0, 1)?;
        let mut out = Outcome::default();

        let decision = qos_feasibility(&net, &fading, &link, &qos)?;
        out.note(format!("decision: {decision:?}"));

        // uniqueness of the balance point on a 10⁴-point grid above λ_d
        let lo = qos.lambda_d() * (1.0 + 1e-6);
        let grid: Vec<f64> =
            (0..10_000).map(|k| lo + (DEFAULT_RATE_CAP - lo) * (f64::from(k) / 9_999.0).powi(2)).collect();
        let gaps: Vec<f64> = grid
            .iter()
            .map(|&r| Ok(queue_violation_prob(r, &qos)? - link_error_prob(&net, &fading, &link, r, qos.unit())?))
            .collect::<Result<_>>()?;
        let changes = gaps.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        out.check(changes <= 1, "uniqueness", format!("sign changes of ε_q - ε_r on the grid: {changes}"));

        if let Some(r) = decision.r_star {
            let eq = queue_violation_prob(r, &qos)?;
            let er = link_error_prob(&net, &fading, &link, r, qos.unit())?;
            let balanced = (eq - er).abs() <= t.root_gap;
            let verdict = er <= 1.0 - (1.0 - qos.eps_target()).sqrt();
            out.check(
                balanced && verdict == decision.feasible,
                "verdict",
                format!(
                    "r* = {r:.9}: |ε_q - ε_r| = {:.1e}; independent verdict {verdict}, reported {}",
                    (eq - er).abs(),
                    decision.feasible
                ),
            );
        } else {
            out.note("no balance point above a(θ′); decision comes from minimization");
        }

        // optimizer against a 10⁴-point grid crowded toward a(θ′)
        let a = minimum_rate(&qos)?;
        let grid_min = (0..10_000)
            .map(|k| a + (DEFAULT_RATE_CAP - a) * (f64::from(k) / 9_999.0).powi(2))
            .map(|r| total_error(&net, &fading, &link, &qos, r))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let agree = decision.eps_opt <= grid_min + t.optimizer_abs && grid_min - decision.eps_opt <= t.optimizer_abs;
        out.check(
            agree,
            "optimizer",
            format!("ε(r_opt) = {:.9} at r_opt = {:.6}; grid minimum {grid_min:.9}", decision.eps_opt, decision.r_opt),
        );

        // total error against Q_max at fixed rates
        let q_grid: Vec<f64> = (1..=60).map(|k| 2.0 * f64::from(k)).collect();
        for r in [0.3, 0.6] {
            let mut asymptotes = Vec::new();
            for n in [1u32, 3] {
                let link = LinkModel::new(self.settings.link_distance, 1.0, n)?;
                let sweep = total_error_q_sweep(&net, &fading, &link, &qos, r, &q_grid)?;
                let er = link_error_prob(&net, &fading, &link, r, qos.unit())?;
                let decreasing = sweep.windows(2).all(|w| w[0] >= w[1]);
                let last = sweep[sweep.len() - 1];
                let flat = (last - er).abs() <= 1e-3 * er.max(1e-12)
                    && (sweep[sweep.len() - 2] - last) <= 1e-3 * (sweep[0] - sweep[1]);
                asymptotes.push(er);
                out.check(
                    decreasing && flat,
                    format!("r={r} n={n} Q sweep"),
                    format!(
                        "r={r} n={n}: ε from {:.4} to {last:.6} (ε_r = {er:.6}); decreasing {decreasing}, flat {flat}",
                        sweep[0]
                    ),
                );
            }
            let lower = asymptotes[1] < asymptotes[0];
            out.check(lower, format!("r={r} floor"), format!("r={r}: larger n gives a lower floor: {lower}"));
        }
        Ok(out)
    }

    fn properties(&self) -> Result<Outcome> {
        let mut out = Outcome::default();
        let fading = reference_fading();

        // complete monotonicity of L(s|z) for k ≤ 4
        let mut violations = 0;
        let mut checked = 0;
        for alpha in [2.5, 3.0, 4.0] {
            let net = NetworkModel::new(1e-4, alpha, PI / 3.0)?;
            let z1 = mean_zn(&net, &fading, DominantIndex::FIRST)?;
            for zeta in [0.1, 0.5, 1.0, 3.0, 10.0] {
                for sigma in [1e-3, 0.1, 0.5, 1.0, 2.0, 10.0] {
                    let z = zeta * z1;
                    let d = laplace_derivatives(&net, &fading, 4, sigma * z, z, 8)?;
                    for (k, v) in d.iter().enumerate() {
                        checked += 1;
                        if (if k % 2 == 0 { *v } else { -*v }) < 0.0 {
                            violations += 1;
                        }
                    }
                }
            }
        }
        out.check(
            violations == 0,
            "monotonicity",
            format!("complete monotonicity: {violations} sign violations in {checked} derivatives"),
        );

        // dependence on φλ only
        let a = reference_network();
        let b = NetworkModel::new(a.lambda() / 2.0, a.alpha(), 2.0 * a.phi())?;
        let mut worst: f64 = 0.0;
        for n in [1u32, 3] {
            let idx = DominantIndex::new(n)?;
            let z = mean_zn(&a, &fading, idx)?;
            let pairs = [
                (mean_zn(&a, &fading, idx)?, mean_zn(&b, &fading, idx)?),
                (mean_partial_interference(&a, &fading, idx)?, mean_partial_interference(&b, &fading, idx)?),
                (laplace_unconditional(&a, &fading, idx, z)?, laplace_unconditional(&b, &fading, idx, z)?),
                (g_derivative(&a, &fading, 2, z, z)?, g_derivative(&b, &fading, 2, z, z)?),
                (cdf_in(&a, &fading, idx, 1.0 / z)?, cdf_in(&b, &fading, idx, 1.0 / z)?),
                (lower_bound(&a, &fading, idx, z)?, lower_bound(&b, &fading, idx, z)?),
            ];
            for (x, y) in pairs {
                worst = worst.max((x - y).abs() / x.abs());
            }
        }
        out.check(worst <= 1e-10, "invariance", format!("(λ, φ) → (λ/2, 2φ): worst relative change {worst:.1e}"));

        // density normalizations
        let net = reference_network();
        let intensity = PowerIntensity::new(&net, &fading);
        let mut worst_norm: f64 = 0.0;
        for n in [1u32, 2, 5] {
            let idx = DominantIndex::new(n)?;
            let lo = intensity.inverse(1e-12).ln();
            let hi = intensity.inverse(f64::from(n) + 60.0).ln();
            let mut f = |u: f64| {
                let z = u.exp();
                pdf_zn(&net, &fading, idx, z).unwrap_or(f64::NAN) * z
            };
            worst_norm =
                worst_norm.max((adaptive_kronrod(&mut f, lo, hi, Tolerance::default(), 2000).value - 1.0).abs());
        }
        for m in [0.75, 1.0, 2.0, 3.5] {
            let fm = FadingModel::new(m, 1.5)?;
            let mut f = |x: f64| fm.pdf(x);
            let mass = adaptive_kronrod(&mut f, 0.0, 1e-6, Tolerance::default(), 2000).value
                + adaptive_kronrod(&mut f, 1e-6, 80.0, Tolerance::default(), 2000).value;
            worst_norm = worst_norm.max((mass - 1.0).abs());
        }
        out.check(
            worst_norm <= self.settings.thresholds.pdf_norm,
            "normalization",
            format!("density normalization: worst deviation {worst_norm:.1e}"),
        );

        // two independent routes to γ(a, x)
        let mut worst_route: f64 = 0.0;
        for a in [-2.5, -5.0 / 3.0, -2.0 / 3.0, -0.5, 0.3, 1.5, 4.2] {
            for x in [0.01, 0.5, 1.0, 3.0, 10.0] {
                let r = lower_inc_gamma(a, x)?;
                let k = lower_inc_gamma_kummer(a, x)?;
                worst_route = worst_route.max((r - k).abs() / r.abs());
            }
        }
        out.check(
            worst_route <= self.settings.thresholds.dual_route_rel,
            "dual routes",
            format!("incomplete gamma dual routes: worst relative gap {worst_route:.1e}"),
        );

        // determinism across worker counts
        let sim = Simulator::new(&net, &fading, &SimConfig::new(2000, self.settings.seed))?;
        let run_with = |threads: usize| -> Result<Ensemble> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(|| sim.run()))
        };
        let deterministic = run_with(1)?.trials() == run_with(4)?.trials();
        out.check(deterministic, "determinism", format!("identical trials with 1 and 4 workers: {deterministic}"));

        Ok(out)
    }
}
