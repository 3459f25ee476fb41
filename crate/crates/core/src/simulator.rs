//! Monte Carlo oracle for the sector network.
//!
//! Each trial draws the interferers seen by a receiver at the origin. Points
//! up to a near radius are drawn explicitly; beyond it the plane is cut into
//! thin geometric shells whose aggregate power is drawn as a Poisson count
//! of Gamma gains times the shell-average path loss. Only the explicit
//! points can be among the strongest few, so ranks and nearest-neighbour
//! statistics come from them, while sums include the shells.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::mean_partial_interference;
use crate::model::{FadingModel, LinkModel, NetworkModel};
use crate::numerics::format_sig12;
use crate::order_stats::DominantIndex;

/// Ranks tracked per trial, both by power and by distance.
pub const TRACKED_RANKS: usize = 8;

/// Expected number of explicitly drawn points.
pub const DEFAULT_NEAR_POINTS: f64 = 256.0;

const SHELL_RATIO: f64 = 1.02;
const MAX_CENSORED_FRACTION: f64 = 0.01;

/// How far out the network is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Fixed outer radius.
    Radius(f64),
    /// Outer radius at which the neglected mean tail is this fraction of
    /// the reference mean.
    TailTolerance(f64),
}

/// Simulation window, trial count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSimConfig")]
pub struct SimConfig {
    pub window: Window,
    pub trials: usize,
    pub seed: u64,
    /// Interferers closer than this are absent (0 for the usual network).
    pub inner_radius: f64,
    pub near_points: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimConfig {
    window_radius: Option<f64>,
    tail_tolerance: Option<f64>,
    trials: usize,
    seed: u64,
    #[serde(default)]
    inner_radius: f64,
    near_points: Option<f64>,
}

impl TryFrom<RawSimConfig> for SimConfig {
    type Error = Error;

    fn try_from(raw: RawSimConfig) -> Result<Self> {
        let window = match (raw.window_radius, raw.tail_tolerance) {
            (Some(r), None) => Window::Radius(r),
            (None, Some(t)) => Window::TailTolerance(t),
            _ => return Err(Error::InvalidParameter("set exactly one of window_radius and tail_tolerance".into())),
        };
        let config = SimConfig {
            window,
            trials: raw.trials,
            seed: raw.seed,
            inner_radius: raw.inner_radius,
            near_points: raw.near_points.unwrap_or(DEFAULT_NEAR_POINTS),
        };
        config.validate()?;
        Ok(config)
    }
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { window: Window::TailTolerance(1e-3), trials, seed, inner_radius: 0.0, near_points: DEFAULT_NEAR_POINTS }
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window, ..self }
    }

    pub fn with_inner_radius(self, inner_radius: f64) -> Self {
        Self { inner_radius, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_trials(self, trials: usize) -> Self {
        Self { trials, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        match self.window {
            Window::Radius(r) if !(r > self.inner_radius) || !r.is_finite() => {
                return Err(Error::InvalidParameter(format!("window radius {r} must exceed the inner radius")));
            }
            Window::TailTolerance(t) if !(t > 0.0 && t < 1.0) => {
                return Err(Error::InvalidParameter(format!("tail tolerance must be in (0, 1), got {t}")));
            }
            _ => {}
        }
        if !(self.inner_radius >= 0.0) || !self.inner_radius.is_finite() {
            return Err(Error::InvalidParameter(format!("inner radius must be >= 0, got {}", self.inner_radius)));
        }
        if !(self.near_points >= 1.0) {
            return Err(Error::InvalidParameter(format!("near_points must be >= 1, got {}", self.near_points)));
        }
        Ok(())
    }
}

/// Mean sector interference from beyond radius `r`: φλΩ r^{2-α} / (α - 2).
pub fn sector_tail_mean(net: &NetworkModel, fading: &FadingModel, r: f64) -> f64 {
    let alpha = net.alpha();
    net.phi() * net.lambda() * fading.mean_gain() * r.powf(2.0 - alpha) / (alpha - 2.0)
}

/// Smallest R whose neglected tail mean is at most `tol` × 𝓘̄(1).
pub fn window_radius_for_tolerance(net: &NetworkModel, fading: &FadingModel, tol: f64) -> Result<f64> {
    let reference = mean_partial_interference(net, fading, DominantIndex::FIRST)?;
    radius_for_tail(net, fading, tol * reference)
}

fn radius_for_tail(net: &NetworkModel, fading: &FadingModel, tail: f64) -> Result<f64> {
    if !(tail > 0.0) {
        return Err(Error::InvalidParameter(format!("tail target must be > 0, got {tail}")));
    }
    let unit = sector_tail_mean(net, fading, 1.0);
    Ok((tail / unit).powf(1.0 / (2.0 - net.alpha())))
}

/// Explicitly drawn interferers of one trial plus the aggregated far field.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub powers_desc: Vec<f64>,
    pub distances_asc: Vec<f64>,
    /// Gains paired with `distances_asc`.
    pub gains: Vec<f64>,
    /// Total power from the shells beyond the explicit region.
    pub far_field: f64,
    /// Independent gain of the intended link.
    pub signal_gain: f64,
}

impl NetworkRealization {
    pub fn total_power(&self) -> f64 {
        self.powers_desc.iter().rev().sum::<f64>() + self.far_field
    }
}

/// Per-trial statistics kept by an [`Ensemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub explicit_count: usize,
    /// Largest powers, zero-padded.
    pub top: [f64; TRACKED_RANKS],
    /// Powers of the nearest points, zero-padded.
    pub nearest: [f64; TRACKED_RANKS],
    /// `partial[n]` = total power minus the n largest, n = 0..=TRACKED_RANKS.
    pub partial: [f64; TRACKED_RANKS + 1],
    pub signal_gain: f64,
}

impl TrialSummary {
    fn from_realization(real: &NetworkRealization, alpha: f64) -> Self {
        let mut top = [0.0; TRACKED_RANKS];
        for (slot, p) in top.iter_mut().zip(&real.powers_desc) {
            *slot = *p;
        }
        let mut nearest = [0.0; TRACKED_RANKS];
        for ((slot, d), g) in nearest.iter_mut().zip(&real.distances_asc).zip(&real.gains) {
            *slot = g * d.powf(-alpha);
        }
        // suffix sums from the weakest point up keep small partial sums accurate
        let mut partial = [0.0; TRACKED_RANKS + 1];
        let mut acc = real.far_field;
        let count = real.powers_desc.len();
        for (i, p) in real.powers_desc.iter().enumerate().rev() {
            acc += p;
            if i <= TRACKED_RANKS {
                partial[i] = acc;
            }
        }
        for slot in partial.iter_mut().skip(count + 1) {
            *slot = real.far_field;
        }
        if count <= TRACKED_RANKS {
            partial[count] = real.far_field;
        }
        Self { explicit_count: count, top, nearest, partial, signal_gain: real.signal_gain }
    }
}

#[derive(Debug, Clone)]
struct Shell {
    count: Option<Poisson<f64>>,
    mean_path_loss: f64,
}

/// Sampler for one (network, fading, window) setting.
#[derive(Debug, Clone)]
pub struct Simulator {
    net: NetworkModel,
    fading: FadingModel,
    config: SimConfig,
    inner: f64,
    near: f64,
    outer: f64,
    near_count: Option<Poisson<f64>>,
    shells: Vec<Shell>,
    gain: Gamma<f64>,
}

impl Simulator {
    pub fn new(net: &NetworkModel, fading: &FadingModel, config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let alpha = net.alpha();
        let inner = config.inner_radius;
        let density = 0.5 * net.phi() * net.lambda();
        let outer = match config.window {
            Window::Radius(r) => r,
            Window::TailTolerance(tol) if inner > 0.0 => {
                radius_for_tail(net, fading, tol * sector_tail_mean(net, fading, inner))?
            }
            Window::TailTolerance(tol) => window_radius_for_tolerance(net, fading, tol)?,
        };
        let near = (inner * inner + config.near_points / density).sqrt().min(outer);
        let near_count = poisson(density * (near * near - inner * inner))?;

        let mut shells = Vec::new();
        let mut lo = near;
        while lo < outer {
            let hi = (lo * SHELL_RATIO).min(outer);
            let area = hi * hi - lo * lo;
            let mean_path_loss = 2.0 * (lo.powf(2.0 - alpha) - hi.powf(2.0 - alpha)) / ((alpha - 2.0) * area);
            shells.push(Shell { count: poisson(density * area)?, mean_path_loss });
            lo = hi;
        }
        let gain = Gamma::new(fading.m(), fading.omega() / fading.m())
            .map_err(|e| Error::InvalidParameter(format!("fading gain: {e}")))?;
        Ok(Self { net: *net, fading: *fading, config: *config, inner, near, outer, near_count, shells, gain })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn network(&self) -> &NetworkModel {
        &self.net
    }

    pub fn fading(&self) -> &FadingModel {
        &self.fading
    }

    /// Radius up to which points are drawn one by one.
    pub fn near_radius(&self) -> f64 {
        self.near
    }

    /// Outer edge of the simulated region.
    pub fn outer_radius(&self) -> f64 {
        self.outer
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(trial);
        rng
    }

    /// Trial `trial` of the configured seed; independent of any other trial.
    pub fn sample_realization(&self, trial: u64) -> NetworkRealization {
        let mut rng = self.rng(trial);
        let alpha = self.net.alpha();
        let count = self.near_count.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        let (r2_lo, r2_span) = (self.inner * self.inner, self.near * self.near - self.inner * self.inner);
        let mut points: Vec<(f64, f64)> = (0..count)
            .map(|_| {
                let d = (r2_lo + rng.random::<f64>() * r2_span).sqrt();
                (d, self.gain.sample(&mut rng))
            })
            .collect();

        let mut far_field = 0.0;
        let shape = self.fading.m();
        let scale = self.fading.omega() / shape;
        for shell in &self.shells {
            let Some(dist) = &shell.count else { continue };
            let k = dist.sample(&mut rng);
            if k > 0.0 {
                let sum = Gamma::new(k * shape, scale).map_or(0.0, |g| g.sample(&mut rng));
                far_field += sum * shell.mean_path_loss;
            }
        }
        let signal_gain = self.gain.sample(&mut rng);

        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut powers_desc: Vec<f64> = points.iter().map(|(d, g)| g * d.powf(-alpha)).collect();
        powers_desc.sort_by(|a, b| b.total_cmp(a));
        NetworkRealization {
            powers_desc,
            distances_asc: points.iter().map(|p| p.0).collect(),
            gains: points.iter().map(|p| p.1).collect(),
            far_field,
            signal_gain,
        }
    }

    /// Runs every trial in parallel. Results depend only on the seed, not on
    /// the number of worker threads.
    pub fn run(&self) -> Ensemble {
        let alpha = self.net.alpha();
        let trials: Vec<TrialSummary> = (0..self.config.trials as u64)
            .into_par_iter()
            .map(|t| TrialSummary::from_realization(&self.sample_realization(t), alpha))
            .collect();
        Ensemble { net: self.net, trials }
    }
}

fn poisson(mean: f64) -> Result<Option<Poisson<f64>>> {
    if mean <= 0.0 {
        return Ok(None);
    }
    Poisson::new(mean).map(Some).map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))
}

/// Sorted sample with a censoring count.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    pub censored: usize,
}

impl EmpiricalDistribution {
    fn new(mut samples: Vec<f64>, censored: usize) -> Self {
        samples.sort_by(|a, b| a.total_cmp(b));
        Self { samples, censored }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples ≤ x.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|v| *v <= x) as f64 / self.samples.len() as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let idx = ((p * self.samples.len() as f64).ceil() as usize).clamp(1, self.samples.len()) - 1;
        self.samples[idx]
    }

    /// Kolmogorov distance to a continuous CDF.
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        let n = self.samples.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = reference(*x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }

    /// Kolmogorov distance between two empirical distributions.
    pub fn sup_distance_to(&self, other: &EmpiricalDistribution) -> f64 {
        self.samples.iter().chain(&other.samples).map(|x| (self.cdf(*x) - other.cdf(*x)).abs()).fold(0.0, f64::max)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        // Welford
        let (mut count, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        let var = if count > 1 { m2 / (count - 1) as f64 } else { f64::NAN };
        Self { mean, std_error: (var / count as f64).sqrt(), count }
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.std_error, self.mean + 1.96 * self.std_error)
    }

    pub fn covers(&self, x: f64) -> bool {
        let (lo, hi) = self.ci95();
        lo <= x && x <= hi
    }
}

/// Trial summaries of one simulation run.
#[derive(Debug, Clone)]
pub struct Ensemble {
    net: NetworkModel,
    trials: Vec<TrialSummary>,
}

impl Ensemble {
    pub fn trials(&self) -> &[TrialSummary] {
        &self.trials
    }

    pub fn network(&self) -> &NetworkModel {
        &self.net
    }

    fn check_rank(n: usize) -> Result<()> {
        if n > TRACKED_RANKS {
            return Err(Error::InvalidParameter(format!("rank {n} exceeds the {TRACKED_RANKS} tracked per trial")));
        }
        Ok(())
    }

    /// Trials with at least `n` explicit points, or an error when more than
    /// 1% fall short.
    fn uncensored(&self, n: usize) -> Result<(Vec<&TrialSummary>, usize)> {
        Self::check_rank(n)?;
        let kept: Vec<&TrialSummary> = self.trials.iter().filter(|t| t.explicit_count >= n).collect();
        let censored = self.trials.len() - kept.len();
        if censored as f64 > MAX_CENSORED_FRACTION * self.trials.len() as f64 {
            return Err(Error::WindowTooSmall { censored, trials: self.trials.len(), rank: n as u32 });
        }
        Ok((kept, censored))
    }

    /// ECDF of the n-th largest interference power.
    pub fn dominant_cdf(&self, n: DominantIndex) -> Result<EmpiricalDistribution> {
        let k = n.get() as usize;
        let (kept, censored) = self.uncensored(k)?;
        Ok(EmpiricalDistribution::new(kept.iter().map(|t| t.top[k - 1]).collect(), censored))
    }

    /// ECDF of the power received from the n-th nearest interferer.
    pub fn nearest_cdf(&self, n: DominantIndex) -> Result<EmpiricalDistribution> {
        let k = n.get() as usize;
        let (kept, censored) = self.uncensored(k)?;
        Ok(EmpiricalDistribution::new(kept.iter().map(|t| t.nearest[k - 1]).collect(), censored))
    }

    /// E[I_n].
    pub fn dominant_mean(&self, n: DominantIndex) -> Result<MeanEstimate> {
        let k = n.get() as usize;
        let (kept, _) = self.uncensored(k)?;
        Ok(MeanEstimate::from_values(kept.iter().map(|t| t.top[k - 1])))
    }

    /// Mean of Σ_{k>n} I_k; n = 0 is the total interference.
    pub fn partial_sum_mean(&self, n: usize) -> Result<MeanEstimate> {
        let (kept, _) = self.uncensored(n)?;
        Ok(MeanEstimate::from_values(kept.iter().map(|t| t.partial[n])))
    }

    /// E[exp(-s 𝓘(n))].
    pub fn laplace(&self, n: usize, s: f64) -> Result<MeanEstimate> {
        let (kept, _) = self.uncensored(n)?;
        Ok(MeanEstimate::from_values(kept.iter().map(|t| (-s * t.partial[n]).exp())))
    }

    /// E[exp(-s 𝓘(n)) | z_n within ±`rel_bin` of `z_target`].
    pub fn conditional_laplace(&self, n: DominantIndex, s: f64, z_target: f64, rel_bin: f64) -> Result<MeanEstimate> {
        let k = n.get() as usize;
        let (kept, _) = self.uncensored(k)?;
        let (lo, hi) = (z_target * (1.0 - rel_bin), z_target * (1.0 + rel_bin));
        let values = kept.iter().filter_map(|t| {
            let z = 1.0 / t.top[k - 1];
            (lo <= z && z <= hi).then(|| (-s * t.partial[k]).exp())
        });
        Ok(MeanEstimate::from_values(values))
    }

    /// Frequency of h u^{-α} / 𝓘(n) < η.
    pub fn outage(&self, link: &LinkModel) -> Result<f64> {
        let n = link.n_excluded as usize;
        let (kept, _) = self.uncensored(n)?;
        let path = link.u.powf(-self.net.alpha());
        let hits = kept.iter().filter(|t| t.signal_gain * path < link.eta * t.partial[n]).count();
        Ok(hits as f64 / kept.len() as f64)
    }

    /// Writes one headered CSV record per trial.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["trial".to_string(), "explicit_count".into(), "signal_gain".into()];
        header.extend((1..=TRACKED_RANKS).map(|k| format!("I_{k}")));
        header.extend((1..=TRACKED_RANKS).map(|k| format!("nearest_{k}")));
        header.extend((0..=TRACKED_RANKS).map(|k| format!("partial_{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (i, t) in self.trials.iter().enumerate() {
            let mut row = vec![i.to_string(), t.explicit_count.to_string(), format_sig12(t.signal_gain)];
            row.extend(t.top.iter().chain(&t.nearest).chain(&t.partial).map(|&v| format_sig12(v)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// ECDF of I_n from a fresh run.
pub fn empirical_cdf_in(
    net: &NetworkModel,
    fading: &FadingModel,
    config: &SimConfig,
    n: DominantIndex,
) -> Result<EmpiricalDistribution> {
    Simulator::new(net, fading, config)?.run().dominant_cdf(n)
}

/// ECDF of the n-th nearest interferer's power from a fresh run.
pub fn empirical_cdf_nth_nearest_power(
    net: &NetworkModel,
    fading: &FadingModel,
    config: &SimConfig,
    n: DominantIndex,
) -> Result<EmpiricalDistribution> {
    Simulator::new(net, fading, config)?.run().nearest_cdf(n)
}

/// Mean of 𝓘(n) with its standard error, from a fresh run.
pub fn empirical_partial_sum(
    net: &NetworkModel,
    fading: &FadingModel,
    config: &SimConfig,
    n: usize,
) -> Result<MeanEstimate> {
    Simulator::new(net, fading, config)?.run().partial_sum_mean(n)
}

/// E[exp(-s 𝓘(n))] from a fresh run.
pub fn empirical_laplace(
    net: &NetworkModel,
    fading: &FadingModel,
    config: &SimConfig,
    n: usize,
    s: f64,
) -> Result<MeanEstimate> {
    Simulator::new(net, fading, config)?.run().laplace(n, s)
}

/// Outage frequency from a fresh run.
pub fn empirical_outage(net: &NetworkModel, fading: &FadingModel, link: &LinkModel, config: &SimConfig) -> Result<f64> {
    Simulator::new(net, fading, config)?.run().outage(link)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fractional_moment;
    use std::f64::consts::PI;

    fn net() -> NetworkModel {
        NetworkModel::new(1e-4, 3.0, PI / 4.0).unwrap()
    }

    fn fading() -> FadingModel {
        FadingModel::new(2.0, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn window_radius_scaling() {
        let (net, fading) = (net(), fading());
        let r1 = window_radius_for_tolerance(&net, &fading, 1e-3).unwrap();
        let r2 = window_radius_for_tolerance(&net, &fading, 5e-4).unwrap();
        assert!(rel(r2 / r1, 2f64.powf(1.0 / (net.alpha() - 2.0))) < 1e-12);
        let tail = sector_tail_mean(&net, &fading, r1);
        let i1 = mean_partial_interference(&net, &fading, DominantIndex::FIRST).unwrap();
        assert!(rel(tail, 1e-3 * i1) < 1e-12);
        // steeper decay: the tail dies off much sooner
        let steep = NetworkModel::new(1e-4, 3.8, PI / 4.0).unwrap();
        assert!(window_radius_for_tolerance(&steep, &fading, 1e-3).unwrap() < r1);
    }

    #[test]
    fn config_parsing_requires_one_window() {
        let ok: SimConfig = toml::from_str("tail_tolerance = 1e-3\ntrials = 10\nseed = 7").unwrap();
        assert_eq!(ok.window, Window::TailTolerance(1e-3));
        assert_eq!(ok.near_points, DEFAULT_NEAR_POINTS);
        assert!(
            toml::from_str::<SimConfig>("window_radius = 100.0\ntail_tolerance = 1e-3\ntrials = 10\nseed = 7").is_err()
        );
        assert!(toml::from_str::<SimConfig>("trials = 10\nseed = 7").is_err());
        assert!(toml::from_str::<SimConfig>("window_radius = 100.0\ntrials = 0\nseed = 7").is_err());
    }

    #[test]
    fn realization_invariants() {
        let (net, fading) = (net(), fading());
        let sim = Simulator::new(&net, &fading, &SimConfig::new(10, 3)).unwrap();
        for t in 0..10 {
            let r = sim.sample_realization(t);
            assert_eq!(r.powers_desc.len(), r.distances_asc.len());
            assert!(r.powers_desc.windows(2).all(|w| w[0] >= w[1]));
            assert!(r.distances_asc.windows(2).all(|w| w[0] <= w[1]));
            let mut recomputed: Vec<f64> =
                r.distances_asc.iter().zip(&r.gains).map(|(d, g)| g * d.powf(-3.0)).collect();
            recomputed.sort_by(|a, b| b.total_cmp(a));
            assert_eq!(recomputed, r.powers_desc);
            assert!(r.distances_asc.iter().all(|d| *d <= sim.near_radius()));
            assert!(r.far_field > 0.0);
            assert_eq!(sim.sample_realization(t), r);
        }
    }

    #[test]
    fn counts_and_gains_follow_the_model() {
        let (net, fading) = (net(), fading());
        let window = 300.0;
        let config = SimConfig::new(10_000, 11).with_window(Window::Radius(window));
        let sim = Simulator::new(&net, &fading, &config).unwrap();
        let (mut count, mut gain, mut frac, mut points) = (0.0, 0.0, 0.0, 0.0);
        for t in 0..10_000 {
            let r = sim.sample_realization(t);
            count += r.distances_asc.len() as f64;
            for g in &r.gains {
                gain += g;
                frac += g.powf(2.0 / 3.0);
                points += 1.0;
            }
        }
        let expected = 0.5 * net.lambda() * net.phi() * window * window;
        assert!(rel(count / 10_000.0, expected) < 0.02);
        assert!(rel(gain / points, fading.mean_gain()) < 0.01);
        assert!(rel(frac / points, fractional_moment(&fading, 3.0)) < 0.01);
    }

    #[test]
    fn far_field_mean_matches_annulus_mean() {
        let (net, fading) = (net(), fading());
        let sim = Simulator::new(&net, &fading, &SimConfig::new(4000, 5)).unwrap();
        let mean = (0..4000).map(|t| sim.sample_realization(t).far_field).sum::<f64>() / 4000.0;
        let exact =
            sector_tail_mean(&net, &fading, sim.near_radius()) - sector_tail_mean(&net, &fading, sim.outer_radius());
        assert!(rel(mean, exact) < 0.01, "{mean} vs {exact}");
    }

    #[test]
    fn determinism_independent_of_workers() {
        let (net, fading) = (net(), fading());
        let sim = Simulator::new(&net, &fading, &SimConfig::new(500, 42)).unwrap();
        let run_with = |threads: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sim.run())
        };
        let (a, b) = (run_with(1), run_with(4));
        assert_eq!(a.trials(), b.trials());
        let other = Simulator::new(&net, &fading, &SimConfig::new(500, 43)).unwrap().run();
        assert_ne!(a.trials(), other.trials());
    }

    #[test]
    fn summaries_are_consistent() {
        let (net, fading) = (net(), fading());
        let sim = Simulator::new(&net, &fading, &SimConfig::new(50, 9)).unwrap();
        for t in 0..50 {
            let r = sim.sample_realization(t);
            let s = TrialSummary::from_realization(&r, 3.0);
            assert!(rel(s.partial[0], r.total_power()) < 1e-12);
            for n in 0..TRACKED_RANKS {
                assert!(rel(s.partial[n] - s.partial[n + 1], s.top[n]) < 1e-6);
                assert!(s.partial[n] >= s.partial[n + 1]);
            }
            assert!(s.top[0] >= s.nearest[0]);
        }
    }

    #[test]
    fn small_window_censors() {
        let (net, fading) = (net(), fading());
        let config = SimConfig::new(2000, 1).with_window(Window::Radius(150.0));
        let ens = Simulator::new(&net, &fading, &config).unwrap().run();
        assert!(matches!(
            ens.dominant_cdf(DominantIndex::new(3).unwrap()),
            Err(Error::WindowTooSmall { trials: 2000, rank: 3, .. })
        ));
        // censored + kept = trials when the fraction is tolerable
        let roomy = SimConfig::new(2000, 1).with_window(Window::Radius(600.0));
        let ens = Simulator::new(&net, &fading, &roomy).unwrap().run();
        let d = ens.dominant_cdf(DominantIndex::new(3).unwrap()).unwrap();
        assert_eq!(d.len() + d.censored, 2000);
    }

    #[test]
    fn ensemble_statistics_basic_properties() {
        let (net, fading) = (net(), fading());
        let ens = Simulator::new(&net, &fading, &SimConfig::new(3000, 2)).unwrap().run();
        assert_eq!(ens.laplace(1, 0.0).unwrap().mean, 1.0);
        let mut prev = f64::INFINITY;
        for n in 0..6 {
            let m = ens.partial_sum_mean(n).unwrap().mean;
            assert!(m < prev);
            prev = m;
        }
        let mut prev = 1.0;
        for k in 0..8 {
            let v = ens.laplace(2, 1e5 * 3f64.powi(k)).unwrap().mean;
            assert!(v < prev);
            prev = v;
        }
        let first = ens.dominant_cdf(DominantIndex::FIRST).unwrap();
        let second = ens.dominant_cdf(DominantIndex::new(2).unwrap()).unwrap();
        for p in [0.1, 0.5, 0.9] {
            assert!(first.quantile(p) >= second.quantile(p));
        }
        let link = LinkModel::new(80.0, 1e12, 1).unwrap();
        assert_eq!(ens.outage(&link).unwrap(), 1.0);
    }

    #[test]
    fn dump_has_header_and_one_line_per_trial() {
        let (net, fading) = (net(), fading());
        let ens = Simulator::new(&net, &fading, &SimConfig::new(20, 2)).unwrap().run();
        let mut buf = Vec::new();
        ens.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[0].starts_with("trial,explicit_count,signal_gain,I_1"));
        assert!(text.ends_with('\n'));
    }
}
