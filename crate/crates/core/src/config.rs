//! Experiment configuration read from a sectioned `key = value` file.
//!
//! Every section is optional; omitted sections take the reference values
//! (λ = 1e-4, α = 3, φ = π/4, Nakagami m = 2 with Ω = 1).
//!
//! ```toml
//! [network]
//! lambda = 1e-4
//! alpha = 3.0
//! phi = 0.7853981633974483
//!
//! [sweeps.phi]
//! ranks = [1, 3]
//! grid = { lo = 0.39269908169872414, hi = 6.283185307179586, points = 5, scale = "log" }
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FadingModel, LinkModel, NetworkModel};
use crate::order_stats::DominantIndex;
use crate::reliability::QosSpec;
use crate::simulator::SimConfig;
use crate::verify::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Evenly spaced grid on [lo, hi], linear or geometric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize, scale: Scale) -> Self {
        Self { lo, hi, points, scale }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidParameter(format!("sweep {name}: {why}")));
        if self.points == 0 {
            return bad("needs at least one point");
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return bad("needs finite lo ≤ hi");
        }
        if self.points == 1 && self.lo != self.hi {
            return bad("a single point needs lo = hi");
        }
        if self.scale == Scale::Log && !(self.lo > 0.0) {
            return bad("a log scale needs lo > 0");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.lo + (self.hi - self.lo) * t,
                    Scale::Log => (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Received-power grid and ranks of the dominant CDF table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSweep {
    pub grid: Grid,
    pub ranks: Vec<u32>,
}

impl Default for PowerSweep {
    fn default() -> Self {
        Self { grid: Grid::new(1e-9, 1e-2, 141, Scale::Log), ranks: vec![1, 2, 5] }
    }
}

/// Reception angles, ranks and per-angle trials of the outage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiSweep {
    pub grid: Grid,
    pub ranks: Vec<u32>,
    pub trials: usize,
}

impl Default for PhiSweep {
    fn default() -> Self {
        Self { grid: Grid::new(PI / 8.0, 2.0 * PI, 5, Scale::Log), ranks: vec![1, 3], trials: 10_000 }
    }
}

/// Buffer sizes, rates and ranks of the QoS table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmaxSweep {
    pub grid: Grid,
    pub rates: Vec<f64>,
    pub ranks: Vec<u32>,
}

impl Default for QmaxSweep {
    fn default() -> Self {
        Self { grid: Grid::new(1.0, 120.0, 120, Scale::Linear), rates: vec![0.3, 0.6], ranks: vec![1, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweeps {
    pub power: PowerSweep,
    pub phi: PhiSweep,
    pub q_max: QmaxSweep,
}

/// Link distance and SIR threshold; the excluded rank comes from the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub u: f64,
    pub eta: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self { u: 80.0, eta: 1.0 }
    }
}

impl LinkSection {
    pub fn with_rank(&self, n: u32) -> Result<LinkModel> {
        LinkModel::new(self.u, self.eta, n)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub network: NetworkModel,
    pub fading: FadingModel,
    pub link: LinkSection,
    pub qos: QosSpec,
    pub sim: SimConfig,
    pub sweeps: Sweeps,
    /// Pass thresholds of `domint verify`.
    pub verify: Thresholds,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            network: NetworkModel::new(1e-4, 3.0, PI / 4.0).expect("valid default network"),
            fading: FadingModel::new(2.0, 1.0).expect("valid default fading"),
            link: LinkSection::default(),
            qos: QosSpec::new(20.0, 0.1, 0.14).expect("valid default QoS"),
            sim: SimConfig::new(100_000, 1),
            sweeps: Sweeps::default(),
            verify: Thresholds::default(),
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.link.with_rank(1)?;
        let s = &self.sweeps;
        s.power.grid.validate("power")?;
        s.phi.grid.validate("phi")?;
        s.q_max.grid.validate("q_max")?;
        if !(s.power.grid.lo > 0.0) {
            return Err(Error::InvalidParameter("sweep power: powers must be > 0".into()));
        }
        if !(s.phi.grid.lo > 0.0 && s.phi.grid.hi <= 2.0 * PI) {
            return Err(Error::InvalidParameter("sweep phi: angles must lie in (0, 2π]".into()));
        }
        if !(s.q_max.grid.lo > 0.0) {
            return Err(Error::InvalidParameter("sweep q_max: buffer sizes must be > 0".into()));
        }
        for (name, ranks) in [("power", &s.power.ranks), ("phi", &s.phi.ranks), ("q_max", &s.q_max.ranks)] {
            if ranks.is_empty() {
                return Err(Error::InvalidParameter(format!("sweep {name}: ranks must be non-empty")));
            }
            for &n in ranks {
                DominantIndex::new(n)?;
            }
        }
        if s.phi.trials == 0 {
            return Err(Error::InvalidParameter("sweep phi: trials must be > 0".into()));
        }
        if s.q_max.rates.is_empty() {
            return Err(Error::InvalidParameter("sweep q_max: rates must be non-empty".into()));
        }
        for &r in &s.q_max.rates {
            if !(r > self.qos.lambda_d()) {
                return Err(Error::InvalidParameter(format!(
                    "sweep q_max: rate {r} must exceed the arrival rate {}",
                    self.qos.lambda_d()
                )));
            }
        }
        Ok(())
    }
}
