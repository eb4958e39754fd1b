//! Plug-in exponent `psi_n` from a simulated path: the phase of `Phi_n`
//! wraps many times, the tracked branch follows the true exponent.

use levy_ma::model;
use levy_ma::prelude::*;
use levy_ma::spectral::ecf_eval;

fn main() -> Result<(), Error> {
    let t = LevyTriplet::reference();
    let k = KernelAlpha::new(0.8)?;
    let path = simulate_path(&SimConfig::new(t.clone(), k, 10_000, 3))?;

    let grid = UGrid::for_cutoff(8.0)?;
    let ecf = ecf_eval(&path, grid)?;
    let psi = psi_n_eval(&ecf, k)?;
    println!(
        "grid du = {}, valid up to u = {:.3}, first zero {:.3}",
        grid.du,
        psi.last_valid_u(),
        psi.x0n
    );
    println!(
        "{:>6} {:>8} {:>22} {:>22}",
        "u", "branch", "psi_n(u)", "psi(u)"
    );
    for u in [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0] {
        let Some(est) = psi.value_at(u) else { continue };
        let idx = (u / grid.du).round() as usize;
        let truth = t.psi(u);
        println!(
            "{u:>6} {:>8} {:>10.4}{:+10.4}i {:>10.4}{:+10.4}i",
            psi.branch[idx], est.re, est.im, truth.re, truth.im
        );
    }
    let arg = model::phi(&t, k, 8.0)?.arg();
    println!("principal arg Phi(8) = {arg:.4}, unwrapped phase is far larger");
    Ok(())
}
