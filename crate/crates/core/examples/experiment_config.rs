//! Loading an experiment file and producing the buffer-size table.

use dominant_interference::cli::cmd_qos;
use dominant_interference::config::ExperimentConfig;

fn main() -> dominant_interference::Result<()> {
    let config = ExperimentConfig::from_toml_str(
        r#"
[link]
u = 60.0

[sweeps.q_max]
rates = [0.4]
ranks = [1, 2]
grid = { lo = 5.0, hi = 50.0, points = 10 }
"#,
    )?;
    let report = cmd_qos(&config)?;
    print!("{}", report.table.to_csv_string());
    if let Some((_, decision)) = report.summary {
        print!("{}", decision.to_csv_string());
    }
    Ok(())
}
