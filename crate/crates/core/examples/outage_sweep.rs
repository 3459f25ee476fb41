//! Outage probability against the reception angle, Nakagami m = 2 against
//! Rayleigh, with the n strongest interferers cancelled.

use std::f64::consts::PI;

use dominant_interference::model::{FadingModel, LinkModel, NetworkModel};
use dominant_interference::reliability::outage_phi_sweep;

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, PI / 4.0)?;
    let phis = [PI / 8.0, PI / 4.0, PI / 2.0, PI, 2.0 * PI];
    let nakagami = FadingModel::new(2.0, 1.0)?;
    let rayleigh = FadingModel::rayleigh(1.0)?;

    println!("{:>8} {:>10} {:>10} {:>10}", "phi", "m=2 n=1", "m=2 n=3", "m=1 n=1");
    let a = outage_phi_sweep(&net, &nakagami, &LinkModel::new(80.0, 1.0, 1)?, &phis)?;
    let b = outage_phi_sweep(&net, &nakagami, &LinkModel::new(80.0, 1.0, 3)?, &phis)?;
    let c = outage_phi_sweep(&net, &rayleigh, &LinkModel::new(80.0, 1.0, 1)?, &phis)?;
    for i in 0..phis.len() {
        println!("{:>8.4} {:>10.5} {:>10.5} {:>10.5}", phis[i], a[i], b[i], c[i]);
    }
    Ok(())
}
