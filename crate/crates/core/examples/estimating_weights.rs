//! Estimating weights: constraints, scaling and the weights file.
//!
//! cargo run --release --example estimating_weights -- 4.2 [weights.csv]

use levy_ma::io;
use levy_ma::quadrature::{integrate_real, QuadOptions};
use levy_ma::weights::{BaseWeight, WeightFamily};

fn main() -> Result<(), levy_ma::Error> {
    let args: Vec<String> = std::env::args().collect();
    let u: f64 = args.get(1).map_or(4.2, |a| a.parse().expect("cutoff"));
    let fam = WeightFamily::new(BaseWeight::default(), u)?;
    let unit = WeightFamily::new(BaseWeight::default(), 1.0)?;
    let (a, b) = fam.support();
    let q = |f: &dyn Fn(f64) -> f64| integrate_real(f, a, b, QuadOptions::default());

    println!(
        "U = {u}, support [{a}, {b}], moments m0, m2, m4 = {:?}",
        fam.moments
    );
    println!(
        "∫ -u²/2 w_sigma   = {:.12}",
        q(&|x| -0.5 * x * x * fam.sigma(x))?
    );
    println!("∫ w_sigma         = {:.3e}", q(&|x| fam.sigma(x))?);
    println!("∫ -w_lambda       = {:.12}", q(&|x| -fam.lambda(x))?);
    println!(
        "∫ -u²/2 w_lambda  = {:.3e}",
        q(&|x| -0.5 * x * x * fam.lambda(x))?
    );
    println!("∫ u w_gamma       = {:.12}", q(&|x| x * fam.gamma(x))?);

    let x = 0.6 * u;
    println!("\nscaling at u = {x}:");
    println!(
        "  w_sigma  {:+.6e} vs U^-3 w1 {:+.6e}",
        fam.sigma(x),
        unit.sigma(x / u) / u.powi(3)
    );
    println!(
        "  w_lambda {:+.6e} vs U^-1 w1 {:+.6e}",
        fam.lambda(x),
        unit.lambda(x / u) / u
    );
    println!(
        "  w_gamma  {:+.6e} vs U^-2 w1 {:+.6e}",
        fam.gamma(x),
        unit.gamma(x / u) / (u * u)
    );

    if let Some(out) = args.get(2) {
        io::write_weights_csv(std::path::Path::new(out), &fam, 401)?;
        println!("wrote {out}");
    }
    Ok(())
}
