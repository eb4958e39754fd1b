//! Estimating weights for the spectral least-squares fits.
//!
//! A base bump `w(u)` on `[eps, 1]` is rescaled to `w^U(u) = w(u/U) / U`.
//! Fitting `Re psi_n(u) ≈ -sigma^2 u^2 / 2 - lambda` and `Im psi_n(u) ≈ gamma u`
//! in `L^2(w^U)` has closed-form solutions that are linear functionals
//! `∫ w_sigma Re psi_n`, `∫ w_lambda Re psi_n` and `∫ w_gamma Im psi_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// `amplitude * (u - eps)^power * (1 - u)^power` on `[eps, 1]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseWeight {
    pub epsilon: f64,
    #[serde(default = "default_power")]
    pub power: u32,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_power() -> u32 {
    2
}

fn default_amplitude() -> f64 {
    1.0
}

impl Default for BaseWeight {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            power: 2,
            amplitude: 1.0,
        }
    }
}

impl BaseWeight {
    pub fn new(epsilon: f64) -> Result<Self> {
        let b = Self {
            epsilon,
            ..Self::default()
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "base weight epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.power == 0 {
            return Err(Error::invalid(
                "base weight power must be >= 1 for continuity",
            ));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid("base weight amplitude must be positive"));
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.epsilon || u >= 1.0 {
            return 0.0;
        }
        let p = self.power as i32;
        self.amplitude * (u - self.epsilon).powi(p) * (1.0 - u).powi(p)
    }

    /// Monomial coefficients of the bump polynomial, lowest degree first.
    fn coefficients(&self) -> Vec<f64> {
        let mut poly = vec![self.amplitude];
        for _ in 0..self.power {
            poly = poly_mul(&poly, &[-self.epsilon, 1.0]);
            poly = poly_mul(&poly, &[1.0, -1.0]);
        }
        poly
    }

    /// `∫ w(s) s^k ds` in closed form.
    pub fn moment(&self, k: u32) -> f64 {
        let eps = self.epsilon;
        self.coefficients()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let d = (j as u32 + k + 1) as i32;
                c * (1.0 - eps.powi(d)) / d as f64
            })
            .sum()
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Which estimating weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Sigma,
    Lambda,
    Gamma,
}

const PANELS: usize = 32;
const NODES_PER_PANEL: usize = 8;

/// The three estimating weights for a given cutoff `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    pub base: BaseWeight,
    pub cutoff: f64,
    /// `m_k^U = ∫ w^U(s) s^k ds` for `k = 0, 2, 4`.
    pub moments: [f64; 3],
    nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl WeightFamily {
    pub fn new(base: BaseWeight, cutoff: f64) -> Result<Self> {
        base.validate()?;
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::invalid(format!(
                "cutoff U must be positive, got {cutoff}"
            )));
        }
        let u2 = cutoff * cutoff;
        let moments = [
            base.moment(0),
            base.moment(2) * u2,
            base.moment(4) * u2 * u2,
        ];
        let [m0, m2, m4] = moments;
        let det = m4 * m0 - m2 * m2;
        if !(det > 1e-12 * m4 * m0) || m2 <= 0.0 {
            return Err(Error::DegenerateWeight(det));
        }
        let (x, w) = gauss_legendre(NODES_PER_PANEL);
        let a = base.epsilon * cutoff;
        let h = (cutoff - a) / PANELS as f64;
        let mut nodes = Vec::with_capacity(PANELS * NODES_PER_PANEL);
        let mut gl_weights = Vec::with_capacity(PANELS * NODES_PER_PANEL);
        for p in 0..PANELS {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                gl_weights.push(0.5 * h * wi);
            }
        }
        Ok(Self {
            base,
            cutoff,
            moments,
            nodes,
            gl_weights,
        })
    }

    /// Support `[eps U, U]` of every weight in the family.
    pub fn support(&self) -> (f64, f64) {
        (self.base.epsilon * self.cutoff, self.cutoff)
    }

    /// Rescaled base weight `w^U(u) = w(u / U) / U`.
    pub fn base_scaled(&self, u: f64) -> f64 {
        self.base.eval(u / self.cutoff) / self.cutoff
    }

    pub fn sigma(&self, u: f64) -> f64 {
        let [m0, m2, m4] = self.moments;
        self.base_scaled(u) * 2.0 * (m0 * u * u - m2) / (m2 * m2 - m4 * m0)
    }

    pub fn lambda(&self, u: f64) -> f64 {
        let [m0, m2, m4] = self.moments;
        self.base_scaled(u) * (m2 * u * u - m4) / (m4 * m0 - m2 * m2)
    }

    pub fn gamma(&self, u: f64) -> f64 {
        self.base_scaled(u) * u / self.moments[1]
    }

    pub fn eval(&self, kind: WeightKind, u: f64) -> f64 {
        match kind {
            WeightKind::Sigma => self.sigma(u),
            WeightKind::Lambda => self.lambda(u),
            WeightKind::Gamma => self.gamma(u),
        }
    }

    /// `∫ w_kind(u) f(u) du` by composite Gauss–Legendre on the support.
    pub fn apply<F>(&self, kind: WeightKind, f: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        self.nodes
            .iter()
            .zip(&self.gl_weights)
            .map(|(&u, &g)| g * self.eval(kind, u) * f(u))
            .sum()
    }

    /// Quadrature nodes used by [`WeightFamily::apply`].
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Build the `w_sigma` evaluator for cutoff `U`.
pub fn build_sigma_weight(base: BaseWeight, cutoff: f64) -> Result<impl Fn(f64) -> f64> {
    let fam = WeightFamily::new(base, cutoff)?;
    Ok(move |u| fam.sigma(u))
}

pub fn build_lambda_weight(base: BaseWeight, cutoff: f64) -> Result<impl Fn(f64) -> f64> {
    let fam = WeightFamily::new(base, cutoff)?;
    Ok(move |u| fam.lambda(u))
}

pub fn build_gamma_weight(base: BaseWeight, cutoff: f64) -> Result<impl Fn(f64) -> f64> {
    let fam = WeightFamily::new(base, cutoff)?;
    Ok(move |u| fam.gamma(u))
}
