//! The characteristic function of `Z_t` through both integral routes.

use levy_ma::model;
use levy_ma::prelude::*;

fn main() -> Result<(), Error> {
    let t = LevyTriplet::reference();
    println!(
        "{:>5} {:>6} {:>24} {:>12} {:>10}",
        "alpha", "u", "Psi(u)", "|route gap|", "|Phi(u)|"
    );
    for alpha in [0.0, 0.5, 0.8, 0.9] {
        let k = KernelAlpha::new(alpha)?;
        for u in [0.5, 2.0, 5.0, 10.0] {
            let a = model::big_psi(&t, k, u)?;
            let b = model::big_psi_direct(&t, k, u)?;
            let phi = model::phi(&t, k, u)?;
            println!(
                "{alpha:>5} {u:>6} {:>11.6}{:+11.6}i {:>12.2e} {:>10.6}",
                a.re,
                a.im,
                (a - b).norm(),
                phi.norm()
            );
        }
    }
    // |Phi| stays away from zero for sigma = 0: Re Psi -> -lambda * ∫ 1{K > 0}
    let k = KernelAlpha::new(0.5)?;
    println!(
        "\n|Phi(200)| at alpha 0.5: {:.6} (limit e^-4 = {:.6})",
        model::phi(&t, k, 200.0)?.norm(),
        (-4.0f64).exp()
    );
    Ok(())
}
