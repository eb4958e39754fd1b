//! Kernel family, Lévy triplet and the exact characteristic functions of the
//! moving-average process. Everything here is deterministic and serves as
//! the oracle layer for the simulator and estimators.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Truncation radius used for the exponential kernel (`alpha = 0`) wherever a
/// finite support is required; `exp(-40) < 1e-17`.
pub const EXP_KERNEL_RADIUS: f64 = 40.0;

/// Symmetric kernel `K_alpha(x) = (1 - alpha |x|)^(1/alpha)` on `|x| <= 1/alpha`,
/// with the exponential limit `exp(-|x|)` at `alpha = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KernelAlpha {
    alpha: f64,
}

impl TryFrom<f64> for KernelAlpha {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<KernelAlpha> for f64 {
    fn from(k: KernelAlpha) -> f64 {
        k.alpha
    }
}

impl KernelAlpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "kernel alpha must lie in [0, 1), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn exponential() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_exponential(&self) -> bool {
        self.alpha == 0.0
    }

    /// `Some(1/alpha)` for compact kernels, `None` for the exponential one.
    pub fn support_radius(&self) -> Option<f64> {
        (self.alpha > 0.0).then(|| 1.0 / self.alpha)
    }

    /// Finite radius beyond which the kernel is treated as zero.
    pub fn effective_radius(&self) -> f64 {
        self.support_radius().unwrap_or(EXP_KERNEL_RADIUS)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if self.alpha == 0.0 {
            return (-ax).exp();
        }
        let base = 1.0 - self.alpha * ax;
        if base <= 0.0 {
            0.0
        } else {
            base.powf(1.0 / self.alpha)
        }
    }

    /// `∫ K_alpha = 2 / (1 + alpha)`.
    pub fn integral(&self) -> f64 {
        2.0 / (1.0 + self.alpha)
    }

    /// `∫ K_alpha^2 = 2 / (2 + alpha)`, i.e. `autocorr(0)` in closed form.
    pub fn square_integral(&self) -> f64 {
        2.0 / (2.0 + self.alpha)
    }

    /// Overlap integral `rho(h) = ∫ K(x) K(x + h) dx`, computed by adaptive
    /// quadrature. Exactly zero once `|h| > 2/alpha`.
    pub fn autocorr(&self, h: f64) -> Result<f64> {
        let h = h.abs();
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            ..QuadOptions::default()
        };
        let f = |x: f64| self.eval(x) * self.eval(x + h);
        let (lo, hi) = match self.support_radius() {
            Some(r) => {
                if h >= 2.0 * r {
                    return Ok(0.0);
                }
                (-r, r - h)
            }
            None => {
                let l = EXP_KERNEL_RADIUS + 5.0;
                (-h - l, l)
            }
        };
        // breakpoints at the kinks of |x| and |x + h|
        let mut pts = vec![lo, hi];
        pts.extend([-h, 0.0].into_iter().filter(|p| *p > lo && *p < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        quadrature::integrate_piecewise(|x| Complex64::new(f(x), 0.0), &pts, opts).map(|z| z.re)
    }
}

/// Piecewise-linear jump-size density tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

impl TabulatedDensity {
    fn validate(&self) -> Result<()> {
        if self.values.len() < 2 || !(self.dx > 0.0) || !self.x0.is_finite() {
            return Err(Error::invalid(
                "tabulated density needs >= 2 values and dx > 0",
            ));
        }
        if self.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "tabulated density must be finite and nonnegative",
            ));
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "tabulated density integrates to {mass}, not 1"
            )));
        }
        Ok(())
    }

    /// Exact integral of the linear interpolant.
    pub fn mass(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * self.dx)
            .sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let k = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    /// `∫ g(x) p(x) dx` with five Gauss points per segment.
    fn expect<G: Fn(f64) -> Complex64>(&self, g: G) -> Complex64 {
        let h = self.dx;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in self.values.windows(2).enumerate() {
            let a = self.x0 + k as f64 * h;
            for (xi, wi) in GL5_X.iter().zip(GL5_W) {
                let s = 0.5 * (xi + 1.0);
                let x = a + s * h;
                let p = w[0] * (1.0 - s) + w[1] * s;
                acc += g(x) * (p * wi * 0.5 * h);
            }
        }
        acc
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target: f64 = rng.random::<f64>() * self.mass();
        let h = self.dx;
        let mut cum = 0.0;
        for (k, w) in self.values.windows(2).enumerate() {
            let seg = 0.5 * (w[0] + w[1]) * h;
            if cum + seg >= target || k + 2 == self.values.len() {
                // solve p0 t + (p1 - p0) t^2 / (2h) = target - cum for t in [0, h]
                let r = (target - cum).max(0.0);
                let slope = (w[1] - w[0]) / h;
                let t = if slope.abs() < 1e-14 * (w[0] + w[1]).max(1e-300) {
                    if w[0] > 0.0 {
                        r / w[0]
                    } else {
                        0.5 * h
                    }
                } else {
                    let disc = (w[0] * w[0] + 2.0 * slope * r).max(0.0);
                    // numerically stable root of slope/2 t^2 + p0 t - r = 0
                    2.0 * r / (w[0] + disc.sqrt())
                };
                return self.x0 + k as f64 * h + t.clamp(0.0, h);
            }
            cum += seg;
        }
        self.x0
    }
}

/// Law of the compound-Poisson jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpDensity {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    /// Centered Laplace law with density `exp(-|x|/scale) / (2 scale)`.
    Laplace {
        scale: f64,
    },
    Tabulated(TabulatedDensity),
}

impl Default for JumpDensity {
    fn default() -> Self {
        JumpDensity::Gaussian {
            mean: 0.0,
            variance: 1.0,
        }
    }
}

impl JumpDensity {
    pub fn standard_gaussian() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JumpDensity::Gaussian { mean, variance } => {
                if !mean.is_finite() || !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::invalid(
                        "gaussian jumps need finite mean and positive variance",
                    ));
                }
            }
            JumpDensity::Laplace { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::invalid("laplace jumps need a positive scale"));
                }
            }
            JumpDensity::Tabulated(t) => t.validate()?,
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            JumpDensity::Gaussian { mean, variance } => {
                let z = x - mean;
                (-0.5 * z * z / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
            }
            JumpDensity::Laplace { scale } => (-x.abs() / scale).exp() / (2.0 * scale),
            JumpDensity::Tabulated(t) => t.pdf(x),
        }
    }

    /// Characteristic function `E exp(i u Y)`.
    pub fn cf(&self, u: f64) -> Complex64 {
        self.cf_minus_one(u) + 1.0
    }

    /// `E exp(i u Y) - 1`, evaluated without cancellation for small `u`.
    pub fn cf_minus_one(&self, u: f64) -> Complex64 {
        match self {
            JumpDensity::Gaussian { mean, variance } => {
                let a = -0.5 * variance * u * u;
                let b = mean * u;
                let half = (0.5 * b).sin();
                let re = a.exp_m1() * b.cos() - 2.0 * half * half;
                let im = a.exp() * b.sin();
                Complex64::new(re, im)
            }
            JumpDensity::Laplace { scale } => {
                let s = scale * u;
                Complex64::new(-s * s / (1.0 + s * s), 0.0)
            }
            JumpDensity::Tabulated(t) => t.expect(|x| {
                let half = (0.5 * u * x).sin();
                Complex64::new(-2.0 * half * half, (u * x).sin())
            }),
        }
    }

    /// Derivative of the characteristic function in `u`.
    pub fn cf_derivative(&self, u: f64) -> Complex64 {
        match self {
            JumpDensity::Gaussian { mean, variance } => {
                Complex64::new(-variance * u, *mean) * self.cf(u)
            }
            JumpDensity::Laplace { scale } => {
                let s2 = scale * scale;
                let d = 1.0 + s2 * u * u;
                Complex64::new(-2.0 * s2 * u / (d * d), 0.0)
            }
            JumpDensity::Tabulated(t) => {
                t.expect(|x| Complex64::new(0.0, x) * Complex64::new(0.0, u * x).exp())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpDensity::Gaussian { mean, .. } => *mean,
            JumpDensity::Laplace { .. } => 0.0,
            JumpDensity::Tabulated(t) => t.expect(|x| Complex64::new(x, 0.0)).re,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            JumpDensity::Gaussian { mean, variance } => variance + mean * mean,
            JumpDensity::Laplace { scale } => 2.0 * scale * scale,
            JumpDensity::Tabulated(t) => t.expect(|x| Complex64::new(x * x, 0.0)).re,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpDensity::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            JumpDensity::Laplace { scale } => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    scale * e
                } else {
                    -scale * e
                }
            }
            JumpDensity::Tabulated(t) => t.sample(rng),
        }
    }
}

/// Drift `gamma`, Brownian volatility `sigma`, jump intensity `lambda` and the
/// jump-size law of the driving Lévy process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(default)]
    pub jumps: JumpDensity,
}

impl LevyTriplet {
    pub fn new(gamma: f64, sigma: f64, lambda: f64, jumps: JumpDensity) -> Result<Self> {
        let t = Self {
            gamma,
            sigma,
            lambda,
            jumps,
        };
        t.validate()?;
        Ok(t)
    }

    /// `gamma = 5, sigma = 0, lambda = 1` with standard Gaussian jumps.
    pub fn reference() -> Self {
        Self {
            gamma: 5.0,
            sigma: 0.0,
            lambda: 1.0,
            jumps: JumpDensity::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be finite"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        self.jumps.validate()
    }

    /// Fourier transform of the Lévy measure, `F[nu](u) = lambda * cf(u)`.
    pub fn levy_measure_ft(&self, u: f64) -> Complex64 {
        self.jumps.cf(u) * self.lambda
    }

    /// `∫ x^2 nu(dx)`.
    pub fn levy_second_moment(&self) -> f64 {
        self.lambda * self.jumps.second_moment()
    }

    /// Characteristic exponent `psi(u) = i gamma u - sigma^2 u^2 / 2 - lambda + F[nu](u)`.
    pub fn psi(&self, u: f64) -> Complex64 {
        Complex64::new(-0.5 * self.sigma * self.sigma * u * u, self.gamma * u)
            + self.jumps.cf_minus_one(u) * self.lambda
    }

    pub fn psi_derivative(&self, u: f64) -> Complex64 {
        Complex64::new(-self.sigma * self.sigma * u, self.gamma)
            + self.jumps.cf_derivative(u) * self.lambda
    }
}

fn oracle_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `Psi(u) = log Phi(u)` via the radial form `2 u^(-alpha) ∫_0^u psi(z) z^(alpha-1) dz`,
/// evaluated after the substitution `z = u y^(1/alpha)`, which turns it into
/// `(2/alpha) ∫_0^1 psi(u y^(1/alpha)) dy`. For `alpha = 0` the form is
/// `2 ∫_0^1 psi(u y) / y dy`.
pub fn big_psi(t: &LevyTriplet, k: KernelAlpha, u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if u < 0.0 {
        return big_psi(t, k, -u).map(|z| z.conj());
    }
    let a = k.alpha();
    if a == 0.0 {
        quadrature::integrate(|y| t.psi(u * y) / y, 0.0, 1.0, oracle_opts()).map(|z| z * 2.0)
    } else {
        let p = 1.0 / a;
        quadrature::integrate(|y| t.psi(u * y.powf(p)), 0.0, 1.0, oracle_opts())
            .map(|z| z * (2.0 * p))
    }
}

/// `Psi(u) = ∫ psi(u K(s)) ds` evaluated directly over the kernel support.
pub fn big_psi_direct(t: &LevyTriplet, k: KernelAlpha, u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // ψ(uK) vanishes wherever K does, so the compact support is exact and
    // the exponential tail past 50 is below 1e-20.
    let r = k.support_radius().unwrap_or(50.0);
    quadrature::integrate(|s| t.psi(u * k.eval(s)), 0.0, r, oracle_opts()).map(|z| z * 2.0)
}

/// `Psi'(u) = ∫ K(s) psi'(u K(s)) ds`, in the same substituted form as [`big_psi`].
pub fn big_psi_derivative(t: &LevyTriplet, k: KernelAlpha, u: f64) -> Result<Complex64> {
    if u < 0.0 {
        return big_psi_derivative(t, k, -u).map(|z| z.conj());
    }
    let a = k.alpha();
    if a == 0.0 {
        quadrature::integrate(|y| t.psi_derivative(u * y), 0.0, 1.0, oracle_opts()).map(|z| z * 2.0)
    } else {
        let p = 1.0 / a;
        quadrature::integrate(
            |y| {
                let ky = y.powf(p);
                t.psi_derivative(u * ky) * ky
            },
            0.0,
            1.0,
            oracle_opts(),
        )
        .map(|z| z * (2.0 * p))
    }
}

/// Characteristic function `Phi(u) = exp(Psi(u))` of the stationary process.
pub fn phi(t: &LevyTriplet, k: KernelAlpha, u: f64) -> Result<Complex64> {
    big_psi(t, k, u).map(|z| z.exp())
}

/// `Phi'(u) = Psi'(u) Phi(u)`.
pub fn phi_derivative(t: &LevyTriplet, k: KernelAlpha, u: f64) -> Result<Complex64> {
    Ok(big_psi_derivative(t, k, u)? * phi(t, k, u)?)
}
