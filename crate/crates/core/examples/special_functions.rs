//! Lower incomplete gamma function at negative non-integer order, by two
//! independent routes.

use dominant_interference::specfun::{lower_inc_gamma, lower_inc_gamma_kummer};

fn main() -> dominant_interference::Result<()> {
    let a = -2.0 / 3.0;
    for x in [0.01, 0.5, 1.0, 5.0, 20.0] {
        let (r, k) = (lower_inc_gamma(a, x)?, lower_inc_gamma_kummer(a, x)?);
        println!("γ({a:.4}, {x:>5}) = {r:+.15e}   kummer {k:+.15e}");
    }
    Ok(())
}
