//! Experiment commands behind the `domint` binary.
//!
//! Each command turns an [`ExperimentConfig`] into CSV tables. Simulation
//! ensembles are returned alongside so the caller can dump raw samples.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::model::FadingModel;
pub use crate::numerics::format_sig12;
use crate::order_stats::{cdf_in, DominantIndex};
use crate::reliability::{outage_probability, qos_feasibility, total_error_q_sweep, RateDecision};
use crate::simulator::{Ensemble, Simulator};
use crate::verify::{CriterionResult, VerifyContext, VerifySettings};

/// Exit status of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Header plus rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| format_sig12(x)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Tables and simulation runs produced by one command.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    /// Secondary table with a file-name suffix, e.g. the rate decisions.
    pub summary: Option<(String, Table)>,
    /// Ensembles keyed by a label usable in file names.
    pub ensembles: Vec<(String, Ensemble)>,
}

fn ranks(list: &[u32]) -> Result<Vec<DominantIndex>> {
    list.iter().map(|&n| DominantIndex::new(n)).collect()
}

/// Analytic and empirical CDFs of I_n, and the empirical CDF of the power
/// from the n-th nearest interferer, on the configured power grid.
pub fn cmd_dominant_cdf(config: &ExperimentConfig) -> Result<Report> {
    let (net, fading) = (&config.network, &config.fading);
    let sweep = &config.sweeps.power;
    let ranks = ranks(&sweep.ranks)?;
    let ens = Simulator::new(net, fading, &config.sim)?.run();

    let mut header = vec!["power".to_string()];
    for prefix in ["analytic_cdf", "empirical_cdf", "nearest_empirical_cdf"] {
        header.extend(ranks.iter().map(|n| format!("{prefix}_n{}", n.get())));
    }
    let dominant = ranks.iter().map(|&n| ens.dominant_cdf(n)).collect::<Result<Vec<_>>>()?;
    let nearest = ranks.iter().map(|&n| ens.nearest_cdf(n)).collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(header);
    for x in sweep.grid.values() {
        let mut row = vec![x];
        for &n in &ranks {
            row.push(cdf_in(net, fading, n, x)?);
        }
        row.extend(dominant.iter().map(|e| e.cdf(x)));
        row.extend(nearest.iter().map(|e| e.cdf(x)));
        table.push_numbers(&row);
    }
    Ok(Report { table, summary: None, ensembles: vec![("dominant".into(), ens)] })
}

fn m_label(fading: &FadingModel) -> String {
    format!("m{}", fading.m())
}

/// Outage against reception angle for the configured fading, plus the
/// Rayleigh reference at the first rank.
pub fn cmd_outage(config: &ExperimentConfig) -> Result<Report> {
    let (net, fading) = (&config.network, &config.fading);
    let sweep = &config.sweeps.phi;
    let ranks = ranks(&sweep.ranks)?;
    let rayleigh = FadingModel::rayleigh(fading.omega())?;
    let first = ranks[0].get();
    let sim = config.sim.with_trials(sweep.trials);

    let (m, r) = (m_label(fading), m_label(&rayleigh));
    let mut header = vec!["phi".to_string()];
    header.extend(ranks.iter().map(|n| format!("analytic_{m}_n{}", n.get())));
    header.extend(ranks.iter().map(|n| format!("empirical_{m}_n{}", n.get())));
    header.push(format!("analytic_{r}_n{first}"));
    header.push(format!("empirical_{r}_n{first}"));

    let phis = sweep.grid.values();
    let rows = phis
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let sector = net.with_phi(phi)?;
            let seed = config.sim.seed.wrapping_add(i as u64);
            let ens = Simulator::new(&sector, fading, &sim.with_seed(seed))?.run();
            let ens_r = Simulator::new(&sector, &rayleigh, &sim.with_seed(seed))?.run();
            let mut analytic = Vec::new();
            let mut empirical = Vec::new();
            for &n in &ranks {
                let link = config.link.with_rank(n.get())?;
                analytic.push(outage_probability(&sector, fading, &link)?);
                empirical.push(ens.outage(&link)?);
            }
            let link = config.link.with_rank(first)?;
            let mut row = vec![phi];
            row.extend(analytic);
            row.extend(empirical);
            row.push(outage_probability(&sector, &rayleigh, &link)?);
            row.push(ens_r.outage(&link)?);
            Ok((row, [(format!("phi{i}_{m}"), ens), (format!("phi{i}_{r}"), ens_r)]))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(header);
    let mut ensembles = Vec::new();
    for (row, runs) in rows {
        table.push_numbers(&row);
        ensembles.extend(runs);
    }
    Ok(Report { table, summary: None, ensembles })
}

/// Total error against buffer size for each configured (rate, rank), and
/// the rate decision per rank.
pub fn cmd_qos(config: &ExperimentConfig) -> Result<Report> {
    let (net, fading) = (&config.network, &config.fading);
    let sweep = &config.sweeps.q_max;
    let q_grid = sweep.grid.values();

    let mut header = vec!["q_max".to_string()];
    let mut columns = Vec::new();
    for &r in &sweep.rates {
        for &n in &sweep.ranks {
            header.push(format!("eps_total_r{}_n{n}", format_sig12(r)));
            let link = config.link.with_rank(n)?;
            columns.push(total_error_q_sweep(net, fading, &link, &config.qos, r, &q_grid)?);
        }
    }
    let mut table = Table::new(header);
    for (i, &q) in q_grid.iter().enumerate() {
        let mut row = vec![q];
        row.extend(columns.iter().map(|c| c[i]));
        table.push_numbers(&row);
    }

    let decisions: Vec<(u32, RateDecision)> = sweep
        .ranks
        .par_iter()
        .map(|&n| Ok((n, qos_feasibility(net, fading, &config.link.with_rank(n)?, &config.qos)?)))
        .collect::<Result<_>>()?;
    let mut summary = Table::new(["n", "feasible", "r_star", "eps_inf", "r_opt", "eps_opt"]);
    for (n, d) in decisions {
        summary.rows.push(vec![
            n.to_string(),
            d.feasible.to_string(),
            d.r_star.map(format_sig12).unwrap_or_default(),
            format_sig12(d.eps_inf),
            format_sig12(d.r_opt),
            format_sig12(d.eps_opt),
        ]);
    }
    Ok(Report { table, summary: Some(("decision".into(), summary)), ensembles: Vec::new() })
}

/// Result of the acceptance run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub settings: VerifySettings,
    pub criteria: Vec<CriterionResult>,
}

/// Verification settings taken from the config: seed, link distance, QoS
/// target and thresholds. `trials` scales all three simulation sizes together.
pub fn verify_settings(config: &ExperimentConfig, trials: Option<usize>) -> VerifySettings {
    let mut settings = VerifySettings {
        seed: config.sim.seed,
        link_distance: config.link.u,
        qos: config.qos,
        thresholds: config.verify,
        ..VerifySettings::default()
    };
    if let Some(t) = trials {
        settings.cdf_trials = t;
        settings.outage_trials = (t / 10).max(1);
        settings.omni_trials = (t / 5).max(1);
    }
    settings
}

/// Runs every criterion; `on_result` sees each one as it finishes.
pub fn cmd_verify<F: FnMut(&CriterionResult)>(settings: VerifySettings, mut on_result: F) -> Result<VerifyReport> {
    let ctx = VerifyContext::new(settings);
    let mut criteria = Vec::new();
    for id in 1..=9 {
        let result = ctx.run(id)?;
        on_result(&result);
        criteria.push(result);
    }
    let passed = criteria.iter().all(|c| c.unexplained_failures().is_empty());
    Ok(VerifyReport { passed, settings, criteria })
}
