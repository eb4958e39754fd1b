use levy_ma::model::{JumpDensity, KernelAlpha, LevyTriplet};
use levy_ma::simulate::{simulate_path, SimConfig};

/// Piecewise evaluation that splits the driving jumps into the forward
/// process on `s >= 0` and the mirrored backward process on `s < 0`.
fn piecewise(t: f64, alpha: f64, gamma: f64, fwd: &[(f64, f64)], bwd: &[(f64, f64)]) -> f64 {
    let r = 1.0 / alpha;
    let k = |x: f64| (1.0 - alpha * x.abs()).max(0.0).powf(1.0 / alpha);
    let mut z = 2.0 * gamma / (1.0 + alpha);
    if t >= r {
        z += fwd
            .iter()
            .filter(|(s, _)| t - r <= *s && *s <= t + r)
            .map(|(s, y)| k(t - s) * y)
            .sum::<f64>();
    } else {
        z += fwd
            .iter()
            .filter(|(s, _)| 0.0 <= *s && *s <= t + r)
            .map(|(s, y)| k(t - s) * y)
            .sum::<f64>();
        z += bwd
            .iter()
            .filter(|(s, _)| 0.0 <= *s && *s <= r - t)
            .map(|(s, y)| k(t + s) * y)
            .sum::<f64>();
    }
    z
}

#[test]
fn matches_piecewise_jump_formula() {
    let busy = LevyTriplet::new(5.0, 0.0, 3.0, JumpDensity::default()).unwrap();
    let mut backward_seen = 0;
    for (alpha, seed) in [(0.5, 1u64), (0.8, 2), (0.9, 3), (0.8, 4), (0.9, 5)] {
        let mut cfg = SimConfig::new(busy.clone(), KernelAlpha::new(alpha).unwrap(), 400, seed);
        cfg.delta = 0.25;
        cfg.record_jumps = true;
        let path = simulate_path(&cfg).unwrap();
        let jumps = path.jump_record.as_ref().unwrap();
        backward_seen += usize::from(jumps.iter().any(|j| j.time < 0.0));
        let fwd: Vec<(f64, f64)> = jumps
            .iter()
            .filter(|j| j.time >= 0.0)
            .map(|j| (j.time, j.size))
            .collect();
        let bwd: Vec<(f64, f64)> = jumps
            .iter()
            .filter(|j| j.time < 0.0)
            .map(|j| (-j.time, j.size))
            .collect();
        for (t, z) in path.times.iter().zip(&path.values) {
            let want = piecewise(*t, alpha, 5.0, &fwd, &bwd);
            assert!(
                (z - want).abs() < 1e-12,
                "alpha {alpha}, t {t}: {z} vs {want}"
            );
        }
    }
    assert!(backward_seen >= 3);
}

#[test]
fn no_jumps_no_noise_gives_constant_path() {
    let t = LevyTriplet::new(5.0, 0.0, 0.0, JumpDensity::default()).unwrap();
    let path = simulate_path(&SimConfig::new(t, KernelAlpha::new(0.8).unwrap(), 10, 0)).unwrap();
    for v in &path.values {
        assert!((v - 50.0 / 9.0).abs() < 1e-14);
    }
}

#[test]
fn gaussian_part_shares_jump_realisation() {
    let k = KernelAlpha::new(0.8).unwrap();
    let a = simulate_path(&SimConfig::new(LevyTriplet::reference(), k, 500, 9)).unwrap();
    let noisy = LevyTriplet::new(5.0, 0.5, 1.0, JumpDensity::default()).unwrap();
    let mut cfg = SimConfig::new(noisy, k, 500, 9);
    cfg.record_jumps = true;
    let b = simulate_path(&cfg).unwrap();
    let mut cfg0 = cfg.clone();
    cfg0.triplet = LevyTriplet::reference();
    let a2 = simulate_path(&cfg0).unwrap();
    assert_eq!(a.values, a2.values);
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| y - x).collect();
    let var = diff.iter().map(|d| d * d).sum::<f64>() / diff.len() as f64;
    // sigma^2 ∫K^2 = 0.25 * 2 / 2.8
    assert!((var - 0.25 / 1.4).abs() < 0.03, "{var}");
}
