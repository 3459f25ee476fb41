//! Outage under Nakagami fading and the queue/channel error trade-off used
//! for rate selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laplace::{laplace_derivatives, DEFAULT_MAX_ORDER};
use crate::model::{FadingModel, LinkModel, NetworkModel};
use crate::numerics::{find_root, gamma_weighted_expectation, minimize_scan};
use crate::order_stats::DominantIndex;

/// Upper end of the rate search, in the chosen rate unit.
pub const DEFAULT_RATE_CAP: f64 = 20.0;

const RATE_SCAN_POINTS: usize = 400;

/// Unit of the Shannon rate log(1 + SIR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    #[default]
    Nats,
    Bits,
}

impl RateUnit {
    /// SIR needed to carry rate `r`.
    pub fn sir_threshold(self, r: f64) -> f64 {
        match self {
            RateUnit::Nats => r.exp_m1(),
            RateUnit::Bits => (r * std::f64::consts::LN_2).exp_m1(),
        }
    }
}

/// Queue and error requirements of a Poisson source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQos")]
pub struct QosSpec {
    q_max: f64,
    eps_target: f64,
    lambda_d: f64,
    unit: RateUnit,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQos {
    q_max: f64,
    eps_target: f64,
    lambda_d: f64,
    #[serde(default)]
    unit: RateUnit,
}

impl TryFrom<RawQos> for QosSpec {
    type Error = Error;

    fn try_from(raw: RawQos) -> Result<Self> {
        Self::new(raw.q_max, raw.eps_target, raw.lambda_d).map(|q| q.with_unit(raw.unit))
    }
}

impl QosSpec {
    pub fn new(q_max: f64, eps_target: f64, lambda_d: f64) -> Result<Self> {
        if !(q_max > 0.0) {
            return Err(Error::InvalidParameter(format!("q_max must be > 0, got {q_max}")));
        }
        if !(eps_target > 0.0 && eps_target < 1.0) {
            return Err(Error::InvalidParameter(format!("eps_target must be in (0, 1), got {eps_target}")));
        }
        if !(lambda_d > 0.0) || !lambda_d.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda_d must be > 0, got {lambda_d}")));
        }
        Ok(Self { q_max, eps_target, lambda_d, unit: RateUnit::Nats })
    }

    pub fn with_unit(self, unit: RateUnit) -> Self {
        Self { unit, ..self }
    }

    pub fn with_q_max(self, q_max: f64) -> Result<Self> {
        Ok(Self::new(q_max, self.eps_target, self.lambda_d)?.with_unit(self.unit))
    }

    pub fn with_eps_target(self, eps_target: f64) -> Result<Self> {
        Ok(Self::new(self.q_max, eps_target, self.lambda_d)?.with_unit(self.unit))
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn eps_target(&self) -> f64 {
        self.eps_target
    }

    pub fn lambda_d(&self) -> f64 {
        self.lambda_d
    }

    pub fn unit(&self) -> RateUnit {
        self.unit
    }

    /// θ′ = -ln ε′ / Q_max, the QoS exponent that alone would meet ε′.
    pub fn target_exponent(&self) -> f64 {
        -self.eps_target.ln() / self.q_max
    }
}

/// Outcome of the rate selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateDecision {
    pub feasible: bool,
    /// Rate where queue and channel errors balance, if it exists above a(θ′).
    pub r_star: Option<f64>,
    /// 1 - (1 - ε_r(r*))², or the optimized error when there is no root.
    pub eps_inf: f64,
    pub r_opt: f64,
    pub eps_opt: f64,
}

fn rank(link: &LinkModel) -> Result<DominantIndex> {
    DominantIndex::new(link.n_excluded)
}

/// P[SIR < η] with the `link.n_excluded` strongest interferers removed:
/// 1 - Σ_{k<m} s^k/k! E[(-1)^k L^{(k)}(s|z_n)], s = m u^α η / Ω.
pub fn outage_probability(net: &NetworkModel, fading: &FadingModel, link: &LinkModel) -> Result<f64> {
    let n = rank(link)?;
    let m = fading.integer_shape().ok_or_else(|| {
        Error::UnsupportedModel(format!("outage needs an integer Nakagami shape, got m = {}", fading.m()))
    })? as usize;
    if m - 1 > DEFAULT_MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: m - 1, max: DEFAULT_MAX_ORDER });
    }
    if !(link.eta >= 0.0) {
        return Err(domain("SIR threshold", link.eta));
    }
    if link.eta == 0.0 {
        return Ok(0.0);
    }
    let s = fading.m() * link.u.powf(net.alpha()) * link.eta / fading.omega();
    if !s.is_finite() {
        return Ok(1.0);
    }
    let success = |z: f64| {
        let Ok(d) = laplace_derivatives(net, fading, m - 1, s, z, DEFAULT_MAX_ORDER) else {
            return f64::NAN;
        };
        // every term s^k/k! (-1)^k L^{(k)} is non-negative
        let mut term_scale = 1.0;
        let mut acc = 0.0;
        for (k, v) in d.iter().enumerate() {
            if k > 0 {
                term_scale *= -s / k as f64;
            }
            acc += term_scale * v;
        }
        acc
    };
    let p = gamma_weighted_expectation(success, n.get(), net, fading)?;
    Ok((1.0 - p.value).clamp(0.0, 1.0))
}

/// Outage for each sector angle in `phis`, evaluated in parallel.
pub fn outage_phi_sweep(net: &NetworkModel, fading: &FadingModel, link: &LinkModel, phis: &[f64]) -> Result<Vec<f64>> {
    phis.par_iter().map(|&phi| outage_probability(&net.with_phi(phi)?, fading, link)).collect()
}

/// a(θ) = λ_d (e^θ - 1) / θ, the effective bandwidth of Poisson arrivals.
pub fn effective_bandwidth(theta: f64, lambda_d: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain("QoS exponent theta", theta));
    }
    if !(lambda_d > 0.0) {
        return Err(domain("arrival rate", lambda_d));
    }
    Ok(lambda_d * theta.exp_m1() / theta)
}

/// ln((e^θ - 1)/θ), continuous at 0 and safe for large θ.
fn ln_bandwidth_ratio(theta: f64) -> f64 {
    if theta < 1e-8 {
        0.5 * theta
    } else if theta > 30.0 {
        theta + (-(-theta).exp()).ln_1p() - theta.ln()
    } else {
        (theta.exp_m1() / theta).ln()
    }
}

/// θ with a(θ) = r.
pub fn invert_effective_bandwidth(r: f64, lambda_d: f64) -> Result<f64> {
    if !(r > lambda_d) {
        return Err(Error::InfeasibleRate { rate: r, lambda_d });
    }
    let target = (r / lambda_d).ln();
    // (e^θ - 1)/θ ≥ 1 + θ/2 and ≥ e^θ/(2θ) for θ ≥ 1 bound the root from above
    let hi = (2.0 * (r / lambda_d - 1.0)).min(2.0 * (target + 2.0 * (target + 2.0).ln() + 2.0)).max(1e-300);
    find_root(|t| ln_bandwidth_ratio(t) - target, 0.0, hi)
}

/// ε_q = exp(-θ(r) Q_max).
pub fn queue_violation_prob(r: f64, qos: &QosSpec) -> Result<f64> {
    Ok((-invert_effective_bandwidth(r, qos.lambda_d)? * qos.q_max).exp())
}

/// ε_r = P[log(1 + SIR) < r].
pub fn link_error_prob(
    net: &NetworkModel,
    fading: &FadingModel,
    link: &LinkModel,
    r: f64,
    unit: RateUnit,
) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain("rate", r));
    }
    outage_probability(net, fading, &LinkModel { eta: unit.sir_threshold(r), ..*link })
}

/// ε = ε_q + ε_r - ε_q ε_r.
pub fn combine_errors(eps_q: f64, eps_r: f64) -> f64 {
    eps_q + eps_r - eps_q * eps_r
}

/// Probability that either the queue bound or the channel fails at rate r.
pub fn total_error(net: &NetworkModel, fading: &FadingModel, link: &LinkModel, qos: &QosSpec, r: f64) -> Result<f64> {
    let eps_q = queue_violation_prob(r, qos)?;
    let eps_r = link_error_prob(net, fading, link, r, qos.unit)?;
    Ok(combine_errors(eps_q, eps_r))
}

/// Total error at a fixed rate for each buffer size in `q_grid`.
pub fn total_error_q_sweep(
    net: &NetworkModel,
    fading: &FadingModel,
    link: &LinkModel,
    qos: &QosSpec,
    r: f64,
    q_grid: &[f64],
) -> Result<Vec<f64>> {
    let eps_r = link_error_prob(net, fading, link, r, qos.unit)?;
    q_grid.par_iter().map(|&q| Ok(combine_errors(queue_violation_prob(r, &qos.with_q_max(q)?)?, eps_r))).collect()
}

/// Lowest admissible rate, a(θ′).
pub fn minimum_rate(qos: &QosSpec) -> Result<f64> {
    effective_bandwidth(qos.target_exponent(), qos.lambda_d)
}

/// Rate minimizing the total error over (a(θ′), r_cap].
pub fn optimize_rate(
    net: &NetworkModel,
    fading: &FadingModel,
    link: &LinkModel,
    qos: &QosSpec,
    r_cap: f64,
) -> Result<f64> {
    let lo = minimum_rate(qos)?;
    if !(r_cap > lo) {
        return Err(Error::InfeasibleRate { rate: r_cap, lambda_d: qos.lambda_d });
    }
    // The queue term collapses within a short distance of a(θ′), so search in
    // u with r = lo + (r_cap - lo) u², which crowds the scan toward lo.
    let span = r_cap - lo;
    let mut failure = None;
    let u = minimize_scan(
        |u| match total_error(net, fading, link, qos, lo + span * u * u) {
            Ok(e) => e,
            Err(err) => {
                failure.get_or_insert(err);
                f64::INFINITY
            }
        },
        0.0,
        1.0,
        RATE_SCAN_POINTS,
    );
    let r = lo + span * u * u;
    if let Some(err) = failure {
        return Err(err);
    }
    if (r_cap - r).abs() <= 1e-6 * r_cap {
        log::warn!("optimal rate sits at the search cap {r_cap}; the error may keep falling beyond it");
    }
    Ok(r)
}

/// Balances ε_q and ε_r above a(θ′) and decides whether ε′ is reachable.
pub fn qos_feasibility(
    net: &NetworkModel,
    fading: &FadingModel,
    link: &LinkModel,
    qos: &QosSpec,
) -> Result<RateDecision> {
    qos_feasibility_capped(net, fading, link, qos, DEFAULT_RATE_CAP)
}

/// [`qos_feasibility`] with an explicit upper end of the rate search.
pub fn qos_feasibility_capped(
    net: &NetworkModel,
    fading: &FadingModel,
    link: &LinkModel,
    qos: &QosSpec,
    r_cap: f64,
) -> Result<RateDecision> {
    let lo = minimum_rate(qos)?;
    let eps_r = |r: f64| link_error_prob(net, fading, link, r, qos.unit);
    let r_opt = optimize_rate(net, fading, link, qos, r_cap)?;
    let eps_opt = total_error(net, fading, link, qos, r_opt)?;

    // ε_q - ε_r falls from ~1 just above λ_d, and its root does not depend on
    // ε′. Since ε_q(a(θ′)) = ε′, the root lies above a(θ′) exactly when
    // ε_r(a(θ′)) ≤ ε′.
    let mut r_star = None;
    if eps_r(lo)? <= qos.eps_target {
        let mut failure = None;
        let gap = |r: f64| {
            let v = queue_violation_prob(r, qos).and_then(|q| Ok(q - eps_r(r)?));
            v.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        };
        let floor = qos.lambda_d * (1.0 + 1e-9);
        match find_root(gap, floor, r_cap) {
            Ok(r) => r_star = Some(r.max(lo)),
            Err(Error::NoBracket { .. }) => {}
            Err(e) => return Err(e),
        }
        if let Some(e) = failure {
            return Err(e);
        }
    }

    Ok(match r_star {
        Some(r) => {
            let e = eps_r(r)?;
            let eps_inf = 1.0 - (1.0 - e) * (1.0 - e);
            RateDecision { feasible: eps_inf <= qos.eps_target, r_star, eps_inf, r_opt, eps_opt }
        }
        None => RateDecision { feasible: eps_opt <= qos.eps_target, r_star: None, eps_inf: eps_opt, r_opt, eps_opt },
    })
}
