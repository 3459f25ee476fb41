use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dominant_interference::cli::{
    cmd_dominant_cdf, cmd_outage, cmd_qos, cmd_verify, verify_settings, Report, EXIT_CONFIG, EXIT_OK,
    EXIT_VERIFY_FAILED,
};
use dominant_interference::config::ExperimentConfig;

/// Dominant and partial interference experiments.
#[derive(Parser)]
#[command(name = "domint", version)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Seed of the simulation runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of simulated trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write raw per-trial samples to this file.
    #[arg(long, global = true)]
    dump: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// CDF of the n-th dominant interference power.
    DominantCdf { config: Option<PathBuf> },
    /// Outage probability against reception angle.
    Outage { config: Option<PathBuf> },
    /// Total error against buffer size, and the rate decision.
    Qos { config: Option<PathBuf> },
    /// Analytic-versus-simulation acceptance checks.
    Verify { config: Option<PathBuf> },
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path).map(BufWriter::new).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_report(report: &Report, out: Option<&Path>, dump: Option<&Path>) -> Result<(), String> {
    let io_err = |e: io::Error| e.to_string();
    match out {
        Some(path) => {
            report.table.write_csv(create(path)?).map_err(io_err)?;
            if let Some((suffix, table)) = &report.summary {
                table.write_csv(create(&with_suffix(path, suffix))?).map_err(io_err)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            report.table.write_csv(&mut stdout).map_err(io_err)?;
            if let Some((_, table)) = &report.summary {
                writeln!(stdout).map_err(io_err)?;
                table.write_csv(&mut stdout).map_err(io_err)?;
            }
        }
    }
    if let Some(path) = dump {
        match report.ensembles.as_slice() {
            [] => log::warn!("this command runs no simulation; nothing to dump"),
            [(_, ens)] => ens.write_dump(create(path)?).map_err(io_err)?,
            many => {
                for (label, ens) in many {
                    ens.write_dump(create(&with_suffix(path, label))?).map_err(io_err)?;
                }
            }
        }
    }
    Ok(())
}

fn run(args: Args) -> Result<i32, String> {
    let config_path = match &args.command {
        Command::DominantCdf { config }
        | Command::Outage { config }
        | Command::Qos { config }
        | Command::Verify { config } => config.clone(),
    };
    let mut config = match &config_path {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::default()),
    }
    .map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        config.sim.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err("--trials must be > 0".into());
        }
        config.sim.trials = trials;
        config.sweeps.phi.trials = trials;
    }
    let out = args.out.clone().or_else(|| config.output.path.clone());

    let report = match args.command {
        Command::DominantCdf { .. } => cmd_dominant_cdf(&config),
        Command::Outage { .. } => cmd_outage(&config),
        Command::Qos { .. } => cmd_qos(&config),
        Command::Verify { .. } => {
            let settings = verify_settings(&config, args.trials);
            let report = cmd_verify(settings, |c| {
                println!("{}", c.line());
                for d in &c.details {
                    println!("    {d}");
                }
                for label in &c.failures {
                    let tolerated = !c.unexplained_failures().contains(&label.as_str());
                    println!(
                        "    failed check {label}{}",
                        if tolerated { " (tolerated: infinite-variance sample mean)" } else { "" }
                    );
                }
            })
            .map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            match &out {
                Some(path) => {
                    let mut w = create(path)?;
                    writeln!(w, "{json}").map_err(|e| e.to_string())?;
                }
                None => println!("{json}"),
            }
            println!("verification {}", if report.passed { "passed" } else { "FAILED" });
            return Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
    }
    .map_err(|e| e.to_string())?;
    write_report(&report, out.as_deref(), args.dump.as_deref())?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Args::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("domint: {message}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
