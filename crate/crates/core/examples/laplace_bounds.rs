//! Laplace transform of the partial interference left after removing the n
//! strongest powers, with its closed-form lower and upper bounds.

use dominant_interference::laplace::{
    laplace_conditional, laplace_derivatives, laplace_unconditional, lower_bound, mean_partial_interference,
    upper_bound, LaplaceQuery,
};
use dominant_interference::model::{FadingModel, NetworkModel};
use dominant_interference::order_stats::{mean_zn, DominantIndex};

fn main() -> dominant_interference::Result<()> {
    let net = NetworkModel::new(1e-4, 3.0, std::f64::consts::FRAC_PI_4)?;
    let fading = FadingModel::new(2.0, 1.0)?;

    for n in [1, 3] {
        let idx = DominantIndex::new(n)?;
        let z = mean_zn(&net, &fading, idx)?;
        println!("n={n}: mean partial interference {:.4e}", mean_partial_interference(&net, &fading, idx)?);
        for sigma in [0.5, 1.0, 2.0] {
            let s = sigma * z;
            let (lo, exact, hi) = (
                lower_bound(&net, &fading, idx, s)?,
                laplace_unconditional(&net, &fading, idx, s)?,
                upper_bound(&net, &fading, idx, s)?,
            );
            // the upper bound needs s small against 1/z̄_n; here it can fail
            let note = if exact > hi { "  (above the upper bound)" } else { "" };
            println!("  s = {sigma}·z̄: lower {lo:.5}  exact {exact:.5}  upper {hi:.5}{note}");
        }
    }

    // conditional on z_1 = z̄_1, with derivatives in s
    let z = mean_zn(&net, &fading, DominantIndex::FIRST)?;
    let s = 1.0 * z;
    let query = LaplaceQuery::new(s, z, DominantIndex::FIRST)?;
    println!("L(s | z̄_1) = {:.6}", laplace_conditional(&net, &fading, &query)?);
    for (k, d) in laplace_derivatives(&net, &fading, 4, s, z, 8)?.iter().enumerate() {
        println!("  d^{k}L/ds^{k} = {d:+.6e}");
    }
    Ok(())
}
