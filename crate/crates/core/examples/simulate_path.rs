//! Simulate a path and compare its sample moments with the stationary ones.
//!
//! cargo run --release --example simulate_path -- 0.8 20000 [out.csv]

use levy_ma::io;
use levy_ma::prelude::*;

fn main() -> Result<(), Error> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map_or(0.8, |a| a.parse().expect("alpha"));
    let n: usize = args.get(2).map_or(20_000, |a| a.parse().expect("n"));

    let mut cfg = SimConfig::new(LevyTriplet::reference(), KernelAlpha::new(alpha)?, n, 1);
    cfg.record_jumps = true;
    let path = simulate_path(&cfg)?;

    let jumps = path.jump_record.as_ref().map_or(0, Vec::len);
    println!("alpha = {alpha}, n = {n}, jumps drawn = {jumps}");
    println!(
        "mean      {:>10.5}   stationary {:>10.5}",
        path.mean(),
        cfg.stationary_mean()
    );
    println!(
        "variance  {:>10.5}   stationary {:>10.5}",
        path.variance(),
        cfg.stationary_autocov(0.0)?
    );
    let m = path.mean();
    for lag in 1..=3 {
        let c: f64 = path
            .values
            .windows(lag + 1)
            .map(|w| (w[0] - m) * (w[lag] - m))
            .sum::<f64>()
            / n as f64;
        println!(
            "lag {lag}     {:>10.5}   stationary {:>10.5}",
            c,
            cfg.stationary_autocov(lag as f64 * cfg.delta)?
        );
    }
    if let Some(out) = args.get(3) {
        io::write_path_csv(std::path::Path::new(out), &path)?;
        println!("wrote {out}");
    }
    Ok(())
}
