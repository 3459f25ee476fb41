//! Direct simulation: one realization, then ensemble statistics and a raw
//! sample dump.

use dominant_interference::model::{FadingModel, LinkModel, NetworkModel};
use dominant_interference::order_stats::DominantIndex;
use dominant_interference::simulator::{SimConfig, Simulator, Window};

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, std::f64::consts::FRAC_PI_4)?;
    let fading = FadingModel::new(2.0, 1.0)?;
    let config = SimConfig::new(10_000, 42).with_window(Window::TailTolerance(1e-3));
    let sim = Simulator::new(&net, &fading, &config)?;
    println!("explicit points out to {:.0}, far field out to {:.0}", sim.near_radius(), sim.outer_radius());

    let one = sim.sample_realization(0);
    println!(
        "trial 0: {} explicit points, strongest {:.3e}, total {:.3e}",
        one.powers_desc.len(),
        one.powers_desc[0],
        one.total_power()
    );

    let ens = sim.run();
    for n in [3, 4] {
        let m = ens.dominant_mean(DominantIndex::new(n)?)?;
        let (lo, hi) = m.ci95();
        println!("E[I_{n}] ≈ {:.4e}  (95% CI {lo:.4e} .. {hi:.4e})", m.mean);
    }
    println!("outage at u = 80, n = 1: {:.4}", ens.outage(&LinkModel::new(80.0, 1.0, 1)?)?);

    let mut buf = Vec::new();
    ens.write_dump(&mut buf).expect("in-memory dump");
    let text = String::from_utf8(buf).expect("utf-8");
    println!("dump: {} lines, header {}", text.lines().count(), text.lines().next().unwrap_or(""));
    Ok(())
}
