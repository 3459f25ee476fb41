//! Transmission rate selection under a buffer-overflow plus link-error target.

use dominant_interference::model::{FadingModel, LinkModel, NetworkModel};
use dominant_interference::reliability::{effective_bandwidth, minimum_rate, qos_feasibility, total_error, QosSpec};

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, std::f64::consts::FRAC_PI_4)?;
    let fading = FadingModel::new(2.0, 1.0)?;
    let qos = QosSpec::new(20.0, 0.1, 0.14)?;

    println!("effective bandwidth at θ = 0.5: {:.5}", effective_bandwidth(0.5, qos.lambda_d())?);
    println!("smallest rate meeting the queue target: {:.5}", minimum_rate(&qos)?);

    for n in [1, 3] {
        let link = LinkModel::new(80.0, 1.0, n)?;
        let d = qos_feasibility(&net, &fading, &link, &qos)?;
        println!("n={n}: {d:?}");
        for r in [0.2, 0.3, 0.6] {
            println!("  ε({r}) = {:.5}", total_error(&net, &fading, &link, &qos, r)?);
        }
    }
    Ok(())
}
