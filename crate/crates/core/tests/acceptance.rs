//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use levy_ma::bench::{self, CutoffPolicy, McDesign, Param};
use levy_ma::cli;
use levy_ma::estimate::{self, EstimationResult};
use levy_ma::model::{self, JumpDensity, KernelAlpha, LevyTriplet};
use levy_ma::quadrature::{integrate_real, QuadOptions};
use levy_ma::simulate::{simulate_path, SimConfig};
use levy_ma::spectral::{psi_n_eval_with_floor, EcfGrid, PsiEstimate, UGrid};
use levy_ma::weights::{BaseWeight, WeightFamily, WeightKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_REPRESENTATION: f64 = 1e-7;
const TOL_INVERSION: f64 = 1e-6;
const TOL_MOMENT: f64 = 1e-10;
const TOL_LS_ORACLE: f64 = 1e-8;
const TOL_EXACT_RECOVERY: f64 = 1e-8;
const TOL_BIAS_AT_8: f64 = 1e-3;
const TOL_MASS: f64 = 1e-6;
const TOL_REAL: f64 = 1e-8;
const SE_MULTIPLE: f64 = 4.0;
const TOL_ECF_SUP: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Outcome;

fn exact_psi(t: &LevyTriplet, k: KernelAlpha, grid: UGrid) -> PsiEstimate {
    let ecf = EcfGrid::from_fn(grid, |u| {
        Ok((model::phi(t, k, u)?, model::phi_derivative(t, k, u)?))
    })
    .unwrap();
    psi_n_eval_with_floor(&ecf, k, 1e-300).unwrap()
}

fn random_triplet(rng: &mut ChaCha8Rng) -> LevyTriplet {
    let jumps = match rng.random_range(0..3) {
        0 => JumpDensity::Gaussian {
            mean: rng.random_range(-1.0..1.0),
            variance: rng.random_range(0.2..2.0),
        },
        1 => JumpDensity::Laplace {
            scale: rng.random_range(0.2..1.5),
        },
        _ => JumpDensity::default(),
    };
    LevyTriplet::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(0.0..2.0),
        rng.random_range(0.0..3.0),
        jumps,
    )
    .unwrap()
}

fn c1_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let t = random_triplet(&mut rng);
        let alpha = if i % 10 == 0 {
            0.0
        } else {
            rng.random_range(0.05..0.95)
        };
        let k = KernelAlpha::new(alpha).unwrap();
        let u = rng.random_range(0.0..8.0);
        let a = model::big_psi(&t, k, u).unwrap();
        let b = model::big_psi_direct(&t, k, u).unwrap();
        worst = worst.max((a - b).norm() / (1.0 + a.norm()).max(1.0));
    }
    outcome(
        worst < TOL_REPRESENTATION,
        format!("max |Psi_sub - Psi_direct| = {worst:.2e}"),
    )
}

fn c2_inversion() -> Outcome {
    let triplets = [
        LevyTriplet::reference(),
        LevyTriplet::new(-2.0, 0.7, 2.0, JumpDensity::Laplace { scale: 0.5 }).unwrap(),
    ];
    let grid = UGrid::new(0.005, 1001).unwrap();
    let mut worst = 0.0f64;
    for t in &triplets {
        for alpha in [0.0, 0.5, 0.8, 0.9] {
            let k = KernelAlpha::new(alpha).unwrap();
            let p = exact_psi(t, k, grid);
            for idx in 20..grid.len {
                worst = worst.max((p.psi[idx] - t.psi(grid.node(idx))).norm());
            }
        }
    }
    outcome(
        worst < TOL_INVERSION,
        format!("max |psi_n - psi| on [0.1, 5] = {worst:.2e}"),
    )
}

fn base_scaled(base: &BaseWeight, cutoff: f64, u: f64) -> f64 {
    base.eval(u / cutoff) / cutoff
}

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate_real(f, a, b, QuadOptions::default()).unwrap()
}

/// Minimiser of a quadratic objective by one Newton step with central finite differences.
fn newton_min<F: Fn(&[f64]) -> f64>(f: F, dim: usize) -> Vec<f64> {
    let h = 1e-2;
    let x0 = vec![0.0; dim];
    let eval = |d: &[(usize, f64)]| {
        let mut x = x0.clone();
        for &(i, s) in d {
            x[i] += s;
        }
        f(&x)
    };
    let f0 = eval(&[]);
    let mut g = vec![0.0; dim];
    let mut hess = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        g[i] = (eval(&[(i, h)]) - eval(&[(i, -h)])) / (2.0 * h);
        hess[i][i] = (eval(&[(i, h)]) - 2.0 * f0 + eval(&[(i, -h)])) / (h * h);
        #[allow(clippy::needless_range_loop)]
        for j in 0..i {
            let v = (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                + eval(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    match dim {
        1 => vec![-g[0] / hess[0][0]],
        2 => {
            let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
            vec![
                -(hess[1][1] * g[0] - hess[0][1] * g[1]) / det,
                -(hess[0][0] * g[1] - hess[1][0] * g[0]) / det,
            ]
        }
        _ => unreachable!(),
    }
}

fn c3_weights() -> Outcome {
    let base = BaseWeight::default();
    let mut worst_moment = 0.0f64;
    for cutoff in [1.0, 1.55, 4.2, 8.8] {
        let fam = WeightFamily::new(base, cutoff).unwrap();
        let (a, b) = fam.support();
        let m = |kind: WeightKind, p: i32| quad(|u| fam.eval(kind, u) * u.powi(p), a, b);
        let checks = [
            (-0.5 * m(WeightKind::Sigma, 2), 1.0),
            (m(WeightKind::Sigma, 0), 0.0),
            (-m(WeightKind::Lambda, 0), 1.0),
            (-0.5 * m(WeightKind::Lambda, 2), 0.0),
            (m(WeightKind::Gamma, 1), 1.0),
        ];
        for (got, want) in checks {
            worst_moment = worst_moment.max((got - want).abs());
        }
        for (i, p) in [0, 2, 4].into_iter().enumerate() {
            let q = quad(|u| base_scaled(&base, cutoff, u) * u.powi(p), a, b);
            worst_moment = worst_moment.max((q - fam.moments[i]).abs() / fam.moments[i]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_ls = 0.0f64;
    for _ in 0..20 {
        let c: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let freq = rng.random_range(0.3..3.0);
        let re = move |u: f64| c[0] + c[1] * u * u + c[2] * (freq * u).cos() + c[3] * (-u).exp();
        let c2: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let im = move |u: f64| {
            c2[0] * u + c2[1] * (freq * u).sin() + c2[2] * u.powi(3) + c2[3] * u.ln_1p()
        };
        let cutoff = rng.random_range(0.8..9.0);
        let fam = WeightFamily::new(base, cutoff).unwrap();
        let (a, b) = fam.support();
        // Re f ≈ -s u^2 / 2 - l and Im f ≈ g u in the base-weighted L2 sense
        let sl = newton_min(
            |x| {
                quad(
                    |u| base_scaled(&base, cutoff, u) * (re(u) + 0.5 * x[0] * u * u + x[1]).powi(2),
                    a,
                    b,
                )
            },
            2,
        );
        let g = newton_min(
            |x| {
                quad(
                    |u| base_scaled(&base, cutoff, u) * (im(u) - x[0] * u).powi(2),
                    a,
                    b,
                )
            },
            1,
        );
        let got = [
            fam.apply(WeightKind::Sigma, &re),
            fam.apply(WeightKind::Lambda, &re),
            fam.apply(WeightKind::Gamma, &im),
        ];
        let want = [sl[0], sl[1], g[0]];
        for (x, y) in got.iter().zip(want) {
            worst_ls = worst_ls.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    outcome(
        worst_moment < TOL_MOMENT && worst_ls < TOL_LS_ORACLE,
        format!("moment identities {worst_moment:.2e}, least-squares oracle {worst_ls:.2e}"),
    )
}

fn c4_exact_recovery() -> Outcome {
    let t = LevyTriplet::new(3.0, 1.5, 0.0, JumpDensity::default()).unwrap();
    let base = BaseWeight::default();
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.5, 0.9] {
        let k = KernelAlpha::new(alpha).unwrap();
        let p = exact_psi(&t, k, UGrid::for_cutoff(8.8).unwrap());
        for u in [0.5, 1.0, 2.7, 4.2, 8.8] {
            let s = estimate::estimate_sigma2(&p, base, u).unwrap().value;
            let l = estimate::estimate_lambda(&p, base, u).unwrap().value;
            let g = estimate::estimate_gamma(&p, base, u).unwrap().value;
            worst = worst
                .max((s - 2.25).abs())
                .max(l.abs())
                .max((g - 3.0).abs());
        }
    }
    outcome(
        worst < TOL_EXACT_RECOVERY,
        format!("max error = {worst:.2e}"),
    )
}

fn c5_bias_decay() -> Outcome {
    let t = LevyTriplet::reference();
    let base = BaseWeight::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.5, 0.8, 0.9] {
        let k = KernelAlpha::new(alpha).unwrap();
        let p = exact_psi(&t, k, UGrid::for_cutoff(8.0).unwrap());
        let e: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&u| estimate::estimate_sigma2(&p, base, u).unwrap().value.abs())
            .collect();
        pass &= e[0] > e[1] && e[1] > e[2] && e[2] < TOL_BIAS_AT_8;
        detail.push(format!("a={alpha}: {:.1e} {:.1e} {:.1e}", e[0], e[1], e[2]));
    }
    outcome(
        pass,
        format!("|sigma2_hat| at U = 2, 4, 8: {}", detail.join("; ")),
    )
}

/// x-grid covering one period `2 pi / du` of the inversion sum.
fn period_grid(du: f64, dx_target: f64) -> Vec<f64> {
    let period = 2.0 * PI / du;
    let m = (period / dx_target).ceil() as usize;
    let dx = period / m as f64;
    (0..=m).map(|i| -0.5 * period + i as f64 * dx).collect()
}

fn mass_check(p: &PsiEstimate, est: &EstimationResult, cutoff: f64) -> (f64, f64) {
    let x = period_grid(p.grid.du, 0.05);
    let d = estimate::estimate_levy_density(p, est, cutoff, &x).unwrap();
    let target = est.lambda.value * estimate::flat_top_weight(0.0);
    ((d.mass - target).abs(), d.max_imag_residue)
}

fn c6_density_mass() -> Outcome {
    let t = LevyTriplet::reference();
    let k = KernelAlpha::new(0.8).unwrap();
    let base = BaseWeight::default();
    let cutoffs = estimate::Cutoffs {
        sigma: 8.5,
        lambda: 3.5,
        gamma: 2.75,
    };

    let p = exact_psi(&t, k, UGrid::for_cutoff(cutoffs.max()).unwrap());
    let est = estimate::estimate_parameters(&p, base, cutoffs).unwrap();
    let (m1, i1) = mass_check(&p, &est, cutoffs.lambda);

    let path = simulate_path(&SimConfig::new(t, k, 2000, 5)).unwrap();
    let settings = estimate::EstimationSettings::new(cutoffs);
    let (est2, p2) = estimate::estimate_from_samples(&path.values, k, &settings).unwrap();
    let (m2, i2) = mass_check(&p2, &est2, cutoffs.lambda);

    let (m, i) = (m1.max(m2), i1.max(i2));
    outcome(
        m < TOL_MASS && i < TOL_REAL,
        format!("mass defect {m:.2e}, imaginary residue {i:.2e}"),
    )
}

fn autocov(x: &[f64], mean: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag)
        .map(|i| (x[i] - mean) * (x[i + lag] - mean))
        .sum::<f64>()
        / n as f64
}

/// Long-run variance of the mean of `y`, truncating autocovariances after `lags`.
fn long_run_se(y: &[f64], lags: usize) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let mut v = autocov(y, m, 0);
    for h in 1..=lags {
        v += 2.0 * autocov(y, m, h);
    }
    (v / y.len() as f64).sqrt()
}

fn c7_simulation_law() -> Outcome {
    let k = KernelAlpha::new(0.8).unwrap();
    let cfg = SimConfig::new(LevyTriplet::reference(), k, 100_000, 2024);
    let path = simulate_path(&cfg).unwrap();
    let z = &path.values;
    let n = z.len() as f64;
    let mean = path.mean();
    let dep = (2.0 * cfg.kernel_radius() / cfg.delta).ceil() as usize;

    let mu = cfg.stationary_mean();
    let mut lrv = cfg.stationary_autocov(0.0).unwrap();
    for h in 1..=dep {
        lrv += 2.0 * cfg.stationary_autocov(h as f64 * cfg.delta).unwrap();
    }
    let z_mean = (mean - mu) / (lrv / n).sqrt();

    let mut zs = vec![z_mean];
    for lag in [0usize, 1] {
        let prod: Vec<f64> = (0..z.len() - lag)
            .map(|i| (z[i] - mu) * (z[i + lag] - mu))
            .collect();
        let c = autocov(z, mean, lag);
        let target = cfg.stationary_autocov(lag as f64 * cfg.delta).unwrap();
        zs.push((c - target) / long_run_se(&prod, dep + lag));
    }

    let grid = UGrid::new(0.01, 301).unwrap();
    let ecf = EcfGrid::from_samples(z, grid).unwrap();
    let sup = (0..grid.len)
        .map(|i| (ecf.phi[i] - model::phi(&cfg.triplet, k, grid.node(i)).unwrap()).norm())
        .fold(0.0, f64::max);

    let pass = zs.iter().all(|s| s.abs() < SE_MULTIPLE) && sup < TOL_ECF_SUP;
    outcome(
        pass,
        format!(
            "mean {mean:.4} (target {mu:.4}), z-scores mean/c0/c1 = {:.2}/{:.2}/{:.2}, sup|Phi_n - Phi| = {sup:.4}",
            zs[0], zs[1], zs[2]
        ),
    )
}

fn c8_monte_carlo() -> Outcome {
    let design = McDesign {
        alphas: vec![0.5, 0.9],
        ns: vec![1000, 10000],
        replications: 25,
        cutoffs: CutoffPolicy::Reference,
        ..McDesign::default()
    };
    let report = bench::run_mc(&design).unwrap();
    let med_abs = |p: Param, a: f64, n: usize| {
        report
            .cell(p, a, n)
            .and_then(|c| c.selected_summary())
            .and_then(|s| s.median_abs_error())
            .unwrap_or(f64::NAN)
    };
    let med_est = |p: Param, a: f64, n: usize| {
        let s = report
            .cell(p, a, n)
            .and_then(|c| c.selected_summary())
            .unwrap();
        bench::median(&s.errors).map_or(f64::NAN, |e| e + p.truth(&design.triplet))
    };
    let mut pass = true;
    let mut lines = Vec::new();
    for a in [0.5, 0.9] {
        for p in Param::ALL {
            let (e1, e2) = (med_abs(p, a, 1000), med_abs(p, a, 10000));
            let m = med_est(p, a, 10000);
            let band = match p {
                Param::Gamma => (4.0, 6.0),
                Param::Lambda => (0.5, 1.5),
                Param::Sigma2 => (-0.15, 0.15),
            };
            let ok = e2 < e1 && m >= band.0 && m <= band.1;
            pass &= ok;
            lines.push(format!(
                "{}@{a}: {e1:.3}->{e2:.3} med {m:.3}{}",
                p.name(),
                if ok { "" } else { " !" }
            ));
        }
    }
    for n in [1000, 10000] {
        let ok = med_abs(Param::Gamma, 0.9, n) <= med_abs(Param::Gamma, 0.5, n);
        pass &= ok;
        if !ok {
            lines.push(format!(
                "gamma error at alpha 0.9 exceeds alpha 0.5 at n={n}"
            ));
        }
    }
    outcome(pass, lines.join(", "))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "version": 1,
        "model": { "alpha": 0.8 },
        "simulation": { "n": 1500, "record_jumps": true },
        "estimation": {
            "write_psi": true,
            "density": { "x_min": -4.0, "x_max": 4.0, "points": 161 }
        },
        "bench": {
            "alphas": [0.8], "ns": [1000, 2000], "replications": 3,
            "triplet": { "gamma": 5.0, "sigma": 0.0, "lambda": 1.0, "jumps": { "kind": "gaussian", "mean": 0.0, "variance": 1.0 } },
            "base_seed": 3,
            "cutoffs": { "kind": "reference" }
        },
        "weights": { "cutoff": 4.2, "points": 101 }
    });
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    p
}

fn run_all_commands(root: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = write_config(root);
    let cfg = cfg.to_str().unwrap();
    let out = root.join("out");
    let out_s = out.to_str().unwrap();
    let path_csv = out.join("path.csv");
    let calls: [Vec<&str>; 4] = [
        vec![
            "levy-ma", "simulate", "--quiet", "--config", cfg, "--seed", "17", "--out", out_s,
        ],
        vec![
            "levy-ma",
            "estimate",
            "--quiet",
            "--config",
            cfg,
            "--input",
            path_csv.to_str().unwrap(),
            "--out",
            out_s,
        ],
        vec![
            "levy-ma", "bench", "--quiet", "--config", cfg, "--seed", "17", "--out", out_s,
        ],
        vec![
            "levy-ma",
            "weights-dump",
            "--quiet",
            "--config",
            cfg,
            "--out",
            out_s,
        ],
    ];
    for args in calls {
        assert_eq!(cli::run(args.clone()), cli::EXIT_OK, "{args:?}");
    }
    let mut files: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c9_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = run_all_commands(a.path());
    let fb = run_all_commands(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let same = fa == fb && fa.len() == 9;
    outcome(
        same,
        format!("{} files compared: {}", fa.len(), names.join(" ")),
    )
}

fn c10_small_u() -> Outcome {
    let triplets = [
        LevyTriplet::reference(),
        LevyTriplet::new(3.0, 1.5, 0.0, JumpDensity::default()).unwrap(),
        LevyTriplet::new(0.0, 1.0, 1.0, JumpDensity::default()).unwrap(),
        LevyTriplet::new(-2.0, 0.0, 2.0, JumpDensity::Laplace { scale: 0.5 }).unwrap(),
    ];
    let mut pass = true;
    let mut worst_last = 0.0f64;
    for t in &triplets {
        for alpha in [0.5, 0.8, 0.9] {
            let v: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&u: &f64| t.psi(u).norm() * u.powf(alpha - 1.0))
                .collect();
            pass &= v[0] > v[1] && v[1] > v[2] && v[2] < 0.5 * v[0];
            worst_last = worst_last.max(v[2]);
        }
    }
    outcome(pass, format!("largest value at u = 1e-4: {worst_last:.2e}"))
}

fn main() {
    let criteria: [(&str, Criterion, Duration); 10] = [
        (
            "1 representation identity",
            c1_representation,
            Duration::from_secs(10),
        ),
        (
            "2 exponent inversion",
            c2_inversion,
            Duration::from_secs(10),
        ),
        ("3 weight constraints", c3_weights, Duration::from_secs(30)),
        (
            "4 exact recovery",
            c4_exact_recovery,
            Duration::from_secs(5),
        ),
        ("5 bias decay", c5_bias_decay, Duration::from_secs(5)),
        (
            "6 density mass identity",
            c6_density_mass,
            Duration::from_secs(10),
        ),
        (
            "7 simulation law",
            c7_simulation_law,
            Duration::from_secs(60),
        ),
        (
            "8 Monte Carlo ordering",
            c8_monte_carlo,
            Duration::from_secs(900),
        ),
        ("9 determinism", c9_determinism, Duration::from_secs(600)),
        (
            "10 small-frequency decay",
            c10_small_u,
            Duration::from_secs(10),
        ),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let ok = result.pass && in_time;
        failed += usize::from(!ok);
        println!(
            "[{}] criterion {name}: {} ({:.2}s / budget {}s{})",
            if ok { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
