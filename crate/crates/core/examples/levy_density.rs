//! Lévy density estimate against the true `lambda * N(0, 1)` density.

use levy_ma::estimate::{EstimationResult, ParamEstimate};
use levy_ma::model;
use levy_ma::prelude::*;
use levy_ma::spectral::psi_n_eval_with_floor;

fn known(value: f64, cutoff: f64) -> ParamEstimate {
    ParamEstimate {
        value,
        requested_cutoff: cutoff,
        cutoff,
        truncated: false,
    }
}

fn main() -> Result<(), Error> {
    let t = LevyTriplet::reference();
    let k = KernelAlpha::new(0.9)?;
    let path = simulate_path(&SimConfig::new(t.clone(), k, 20_000, 5))?;
    let cutoffs = Cutoffs {
        sigma: 8.8,
        lambda: 5.1,
        gamma: 3.5,
    };
    let (est, psi) = estimate_from_samples(&path.values, k, &EstimationSettings::new(cutoffs))?;

    let xs: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
    let d = estimate_levy_density(&psi, &est, 4.0, &xs)?;
    println!(
        "cutoff {} (truncated: {}), lambda_hat {:.4}",
        d.cutoff,
        d.truncated,
        est.lambda_hat()
    );
    println!("{:>6} {:>10} {:>10}", "x", "nu_n", "nu");
    for (x, v) in d.x.iter().zip(&d.nu).step_by(4) {
        println!("{x:>6.2} {v:>10.5} {:>10.5}", t.lambda * t.jumps.pdf(*x));
    }

    // Exact characteristic function and true parameters isolate the smoothing bias.
    let grid = UGrid::for_cutoff(8.0)?;
    let ecf = EcfGrid::from_fn(grid, |u| {
        Ok((model::phi(&t, k, u)?, model::phi_derivative(&t, k, u)?))
    })?;
    let exact = psi_n_eval_with_floor(&ecf, k, 1e-300)?;
    let truth = EstimationResult {
        sigma2: known(0.0, 8.0),
        lambda: known(1.0, 8.0),
        gamma: known(5.0, 8.0),
        x0n: exact.x0n,
    };
    let d = estimate_levy_density(&exact, &truth, 8.0, &[0.0, 1.0])?;
    println!(
        "\nexact input, U = 8: nu_n(0) = {:.5} (nu(0) = {:.5}), nu_n(1) = {:.5} (nu(1) = {:.5})",
        d.nu[0],
        t.jumps.pdf(0.0),
        d.nu[1],
        t.jumps.pdf(1.0)
    );
    Ok(())
}
