//! End-to-end estimation of `(sigma^2, lambda, gamma)` from one simulated
//! path per kernel, at the tabulated cutoffs.

use levy_ma::cli::reference_cutoffs;
use levy_ma::prelude::*;

fn main() -> Result<(), Error> {
    let n = 10_000;
    let t = LevyTriplet::reference();
    println!("truth: sigma^2 = 0, lambda = 1, gamma = 5; n = {n}");
    for alpha in [0.5, 0.8, 0.9] {
        let k = KernelAlpha::new(alpha)?;
        let path = simulate_path(&SimConfig::new(t.clone(), k, n, 11))?;
        let cutoffs = reference_cutoffs(alpha, n).expect("tabulated alpha");
        let (est, psi) = estimate_from_samples(&path.values, k, &EstimationSettings::new(cutoffs))?;
        println!(
            "alpha {alpha}: sigma2 {:+.4} (U {}), lambda {:.4} (U {}), gamma {:.4} (U {}), x0n {:.2}{}",
            est.sigma2_hat(),
            est.sigma2.cutoff,
            est.lambda_hat(),
            est.lambda.cutoff,
            est.gamma_hat(),
            est.gamma.cutoff,
            psi.x0n,
            if est.truncated() { " [truncated]" } else { "" }
        );
    }

    // Wider jumps: their transform has died out before the Brownian part
    // pushes |Phi_n| under the noise floor.
    let noisy = LevyTriplet::new(
        5.0,
        0.8,
        1.0,
        JumpDensity::Gaussian {
            mean: 0.0,
            variance: 9.0,
        },
    )?;
    let k = KernelAlpha::new(0.9)?;
    let path = simulate_path(&SimConfig::new(noisy, k, n, 12))?;
    let cutoffs = Cutoffs {
        sigma: 4.0,
        lambda: 4.0,
        gamma: 3.0,
    };
    let (est, _) = estimate_from_samples(&path.values, k, &EstimationSettings::new(cutoffs))?;
    println!(
        "sigma = 0.8, jumps N(0, 9), alpha 0.9: sigma2_hat {:.4} (truth 0.64), lambda_hat {:.4}",
        est.sigma2_hat(),
        est.lambda_hat()
    );
    Ok(())
}
