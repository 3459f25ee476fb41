//! CDF and mean of the n-th strongest interference power, checked against a
//! small simulation.

use dominant_interference::model::{FadingModel, NetworkModel};
use dominant_interference::order_stats::{cdf_in, mean_in, mean_zn, DominantIndex};
use dominant_interference::simulator::{SimConfig, Simulator};

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, std::f64::consts::FRAC_PI_4)?;
    let fading = FadingModel::new(2.0, 1.0)?;
    let ens = Simulator::new(&net, &fading, &SimConfig::new(20_000, 7))?.run();

    for n in [1, 2, 5] {
        let idx = DominantIndex::new(n)?;
        let median_power = 1.0 / mean_zn(&net, &fading, idx)?;
        let ecdf = ens.dominant_cdf(idx)?;
        let gap = ecdf.sup_distance(|x| cdf_in(&net, &fading, idx, x).unwrap());
        println!(
            "n={n}: P(I_n ≤ {median_power:.3e}) = {:.4} (simulated {:.4}), sup gap {gap:.4}",
            cdf_in(&net, &fading, idx, median_power)?,
            ecdf.cdf(median_power)
        );
        if n > 1 {
            println!("      E[I_n] = {:.4e}", mean_in(&net, &fading, idx)?);
        }
    }
    Ok(())
}
