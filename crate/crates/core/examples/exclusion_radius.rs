//! Radius of the omnidirectional guard zone that leaves the same mean
//! interference as removing the n strongest sector interferers.

use dominant_interference::laplace::{equivalent_exclusion_radius, mean_partial_interference, omni_mean_outside};
use dominant_interference::model::{FadingModel, NetworkModel};
use dominant_interference::order_stats::DominantIndex;

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, std::f64::consts::FRAC_PI_4)?;
    let fading = FadingModel::new(2.0, 1.0)?;
    for n in 1..=5 {
        let idx = DominantIndex::new(n)?;
        let r = equivalent_exclusion_radius(&net, &fading, idx)?;
        let target = mean_partial_interference(&net, &fading, idx)?;
        println!("n={n}: R = {r:9.3}  mean {target:.4e}  outside R {:.4e}", omni_mean_outside(&net, &fading, r)?);
    }
    Ok(())
}
