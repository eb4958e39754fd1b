//! Exact simulation of `Z_t = ∫ K(t - s) dL_s` on an equidistant grid.
//!
//! Jumps come from a single homogeneous Poisson point process on the window
//! `[t_1 - r, t_n + r]`, where `r` is the kernel radius; with a compactly
//! supported kernel this makes the sampled vector exactly stationary. The
//! Brownian part is a centered Gaussian vector with banded Toeplitz
//! covariance `sigma^2 rho(|i - j| delta)`, drawn through a banded Cholesky
//! factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KernelAlpha, LevyTriplet};

const STREAM_JUMP_TIMES: u64 = 0;
const STREAM_JUMP_SIZES: u64 = 1;
const STREAM_GAUSSIAN: u64 = 2;

/// Diagonal jitters tried, relative to the lag-0 variance, when the
/// Gaussian covariance is numerically not positive definite.
const JITTER_LADDER: [f64; 5] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub triplet: LevyTriplet,
    pub kernel: KernelAlpha,
    pub delta: f64,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub t_start: f64,
    /// Keep `(jump time, jump size)` pairs on the returned path.
    #[serde(default)]
    pub record_jumps: bool,
}

impl SimConfig {
    pub fn new(triplet: LevyTriplet, kernel: KernelAlpha, n: usize, seed: u64) -> Self {
        Self {
            triplet,
            kernel,
            delta: 1.0,
            n,
            seed,
            t_start: 0.0,
            record_jumps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.triplet.validate()?;
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.n == 0 {
            return Err(Error::invalid("number of observations n must be >= 1"));
        }
        if !self.t_start.is_finite() {
            return Err(Error::invalid("t_start must be finite"));
        }
        Ok(())
    }

    /// Kernel radius used for the jump window; 40 for the exponential kernel.
    pub fn kernel_radius(&self) -> f64 {
        self.kernel.effective_radius()
    }

    /// Observation time of the `j`-th sample, `j = 1..=n`.
    pub fn time(&self, j: usize) -> f64 {
        self.t_start + j as f64 * self.delta
    }

    /// `E Z = (gamma + lambda E Y) ∫K`.
    pub fn stationary_mean(&self) -> f64 {
        (self.triplet.gamma + self.triplet.lambda * self.triplet.jumps.mean())
            * self.kernel.integral()
    }

    /// `Cov(Z_t, Z_{t+h}) = (sigma^2 + lambda E Y^2) rho(h)`.
    pub fn stationary_autocov(&self, h: f64) -> Result<f64> {
        let t = &self.triplet;
        Ok((t.sigma * t.sigma + t.levy_second_moment()) * self.kernel.autocorr(h)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub config: SimConfig,
    pub jump_record: Option<Vec<Jump>>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample variance with divisor `n`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }
}

/// Toeplitz band `c[k] = Cov(G_i, G_{i+k})`, `k = 0..=bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedToeplitz {
    pub n: usize,
    pub lags: Vec<f64>,
}

impl BandedToeplitz {
    pub fn bandwidth(&self) -> usize {
        self.lags.len().saturating_sub(1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lags.get(i.abs_diff(j)).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.lags.iter().all(|c| *c == 0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Covariance of the Gaussian component on the observation grid.
pub fn gaussian_grid_cov(cfg: &SimConfig) -> Result<BandedToeplitz> {
    let sigma2 = cfg.triplet.sigma * cfg.triplet.sigma;
    let band = (2.0 * cfg.kernel_radius() / cfg.delta).ceil() as usize;
    let band = band.min(cfg.n.saturating_sub(1));
    let lags = (0..=band)
        .map(|k| {
            if sigma2 == 0.0 {
                Ok(0.0)
            } else {
                Ok(sigma2 * cfg.kernel.autocorr(k as f64 * cfg.delta)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandedToeplitz { n: cfg.n, lags })
}

/// Lower-triangular banded Cholesky factor, row `i` holding `L[i][i-b..=i]`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    band: usize,
    rows: Vec<f64>,
    jitter: f64,
}

impl BandedCholesky {
    pub fn factor(cov: &BandedToeplitz) -> Result<Self> {
        let scale = cov
            .lags
            .first()
            .copied()
            .unwrap_or(0.0)
            .abs()
            .max(f64::MIN_POSITIVE);
        match Self::try_factor(cov, 0.0) {
            Ok(f) => Ok(f),
            Err(mut last) => {
                for rel in JITTER_LADDER {
                    match Self::try_factor(cov, rel * scale) {
                        Ok(f) => return Ok(f),
                        Err(e) => last = e,
                    }
                }
                Err(last)
            }
        }
    }

    fn try_factor(cov: &BandedToeplitz, jitter: f64) -> Result<Self> {
        let n = cov.n;
        let b = cov.bandwidth();
        let w = b + 1;
        let mut rows = vec![0.0; n * w];
        // entry L(i, j) lives at rows[i * w + (j + b - i)]
        let idx = |i: usize, j: usize| i * w + (j + b - i);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let mut s = cov.get(i, j);
                if i == j {
                    s += jitter;
                }
                let k0 = j0.max(j.saturating_sub(b));
                for k in k0..j {
                    s -= rows[idx(i, k)] * rows[idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::CholeskyFailure { row: i, jitter });
                    }
                    rows[idx(i, i)] = s.sqrt();
                } else {
                    rows[idx(i, j)] = s / rows[idx(j, j)];
                }
            }
        }
        Ok(Self {
            n,
            band: b,
            rows,
            jitter,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.band {
            return 0.0;
        }
        self.rows[i * (self.band + 1) + (j + self.band - i)]
    }

    /// `L z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|i| {
                let j0 = i.saturating_sub(self.band);
                (j0..=i).map(|j| self.lower(i, j) * z[j]).sum()
            })
            .collect()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Poisson jump times on `[lo, hi]` in increasing order, with their sizes.
fn draw_jumps(cfg: &SimConfig, lo: f64, hi: f64) -> Vec<Jump> {
    let lambda = cfg.triplet.lambda;
    if lambda == 0.0 {
        return Vec::new();
    }
    let mut times_rng = stream(cfg.seed, STREAM_JUMP_TIMES);
    let mut sizes_rng = stream(cfg.seed, STREAM_JUMP_SIZES);
    let mut jumps = Vec::with_capacity(((hi - lo) * lambda * 1.1) as usize + 16);
    let mut s = lo;
    loop {
        let gap: f64 = Exp1.sample(&mut times_rng);
        s += gap / lambda;
        if s > hi {
            break;
        }
        let size = cfg.triplet.jumps.sample(&mut sizes_rng);
        jumps.push(Jump { time: s, size });
    }
    jumps
}

/// Simulate `n` equidistant observations of the moving-average process.
pub fn simulate_path(cfg: &SimConfig) -> Result<SamplePath> {
    cfg.validate()?;
    let r = cfg.kernel_radius();
    let times: Vec<f64> = (1..=cfg.n).map(|j| cfg.time(j)).collect();
    let lo = times[0] - r;
    let hi = times[cfg.n - 1] + r;
    let jumps = draw_jumps(cfg, lo, hi);

    let drift = cfg.triplet.gamma * cfg.kernel.integral();
    let kernel = cfg.kernel;
    let mut values: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let first = jumps.partition_point(|j| j.time < t - r);
            let last = jumps.partition_point(|j| j.time <= t + r);
            drift
                + jumps[first..last]
                    .iter()
                    .map(|j| kernel.eval(t - j.time) * j.size)
                    .sum::<f64>()
        })
        .collect();

    if cfg.triplet.sigma > 0.0 {
        let cov = gaussian_grid_cov(cfg)?;
        let chol = BandedCholesky::factor(&cov)?;
        let mut rng = stream(cfg.seed, STREAM_GAUSSIAN);
        let z: Vec<f64> = (0..cfg.n)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        for (v, g) in values.iter_mut().zip(chol.mul_vec(&z)) {
            *v += g;
        }
    }

    Ok(SamplePath {
        times,
        values,
        config: cfg.clone(),
        jump_record: cfg.record_jumps.then_some(jumps),
    })
}
