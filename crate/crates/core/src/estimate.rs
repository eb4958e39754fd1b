//! Parameter and Lévy-density estimators built on [`PsiEstimate`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::KernelAlpha;
use crate::spectral::{self, EcfGrid, PsiEstimate, UGrid};
use crate::weights::{BaseWeight, WeightFamily, WeightKind};

/// One scalar estimate together with the cutoff it was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub value: f64,
    pub requested_cutoff: f64,
    /// Cutoff actually used; smaller than requested when `psi_n` ran out.
    pub cutoff: f64,
    pub truncated: bool,
}

/// Spectral cutoffs, one per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub sigma: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl Cutoffs {
    pub fn uniform(u: f64) -> Self {
        Self {
            sigma: u,
            lambda: u,
            gamma: u,
        }
    }

    pub fn max(&self) -> f64 {
        self.sigma.max(self.lambda).max(self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub sigma2: ParamEstimate,
    pub lambda: ParamEstimate,
    pub gamma: ParamEstimate,
    pub x0n: f64,
}

impl EstimationResult {
    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2.value
    }
    pub fn lambda_hat(&self) -> f64 {
        self.lambda.value
    }
    pub fn gamma_hat(&self) -> f64 {
        self.gamma.value
    }
    pub fn truncated(&self) -> bool {
        self.sigma2.truncated || self.lambda.truncated || self.gamma.truncated
    }
}

fn estimate_component(
    psi: &PsiEstimate,
    base: BaseWeight,
    cutoff: f64,
    kind: WeightKind,
) -> Result<ParamEstimate> {
    let last = psi.last_valid_u();
    let truncated = cutoff > last;
    let used = if truncated { last } else { cutoff };
    if !(used > 0.0) {
        return Err(Error::invalid(format!(
            "psi_n is valid only at u = 0 (first zero at {}); no frequencies to fit",
            psi.x0n
        )));
    }
    let fam = WeightFamily::new(base, used)?;
    let value = fam.apply(kind, |u| {
        let v = psi
            .value_at(u)
            .expect("weight support lies inside the valid range");
        match kind {
            WeightKind::Gamma => v.im,
            _ => v.re,
        }
    });
    Ok(ParamEstimate {
        value,
        requested_cutoff: cutoff,
        cutoff: used,
        truncated,
    })
}

/// `sigma_n^2 = ∫ w_sigma^U(u) Re psi_n(u) du`.
pub fn estimate_sigma2(psi: &PsiEstimate, base: BaseWeight, cutoff: f64) -> Result<ParamEstimate> {
    estimate_component(psi, base, cutoff, WeightKind::Sigma)
}

/// `lambda_n = ∫ w_lambda^U(u) Re psi_n(u) du`.
pub fn estimate_lambda(psi: &PsiEstimate, base: BaseWeight, cutoff: f64) -> Result<ParamEstimate> {
    estimate_component(psi, base, cutoff, WeightKind::Lambda)
}

/// `gamma_n = ∫ w_gamma^U(u) Im psi_n(u) du`.
pub fn estimate_gamma(psi: &PsiEstimate, base: BaseWeight, cutoff: f64) -> Result<ParamEstimate> {
    estimate_component(psi, base, cutoff, WeightKind::Gamma)
}

pub fn estimate_parameters(
    psi: &PsiEstimate,
    base: BaseWeight,
    cutoffs: Cutoffs,
) -> Result<EstimationResult> {
    Ok(EstimationResult {
        sigma2: estimate_sigma2(psi, base, cutoffs.sigma)?,
        lambda: estimate_lambda(psi, base, cutoffs.lambda)?,
        gamma: estimate_gamma(psi, base, cutoffs.gamma)?,
        x0n: psi.x0n,
    })
}

/// Flat-top spectral function: 1 on `[-1, 1]`, zero outside `(-2, 2)`, with
/// the `C^∞` transition `exp(-e^{-1/(|v|-1)} / (2 - |v|))` in between.
pub fn flat_top(v: f64) -> f64 {
    let a = v.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        (-(-1.0 / (a - 1.0)).exp() / (2.0 - a)).exp()
    }
}

/// Default density regulariser `w_nu(u) = flat_top(2u)`: supported on
/// `[-1, 1]` and identically 1 on `[-1/2, 1/2]`.
pub fn flat_top_weight(u: f64) -> f64 {
    flat_top(2.0 * u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub x: Vec<f64>,
    pub nu: Vec<f64>,
    pub requested_cutoff: f64,
    pub cutoff: f64,
    pub truncated: bool,
    /// Trapezoid integral of `nu` over the x-grid.
    pub mass: f64,
    /// Largest imaginary part left over by the inversion quadrature.
    pub max_imag_residue: f64,
}

/// Regularised inverse Fourier transform of the remainder
/// `psi_n(u) + sigma_n^2 u^2 / 2 - i gamma_n u + lambda_n`, weighted by
/// `w_nu(u / U)`. Uses `F^{-1}[h](x) = (1/2pi) ∫ e^{-iux} h(u) du` and the
/// trapezoid rule on the `psi_n` grid mirrored to negative frequencies.
pub fn estimate_levy_density_with<W>(
    psi: &PsiEstimate,
    est: &EstimationResult,
    cutoff: f64,
    x_grid: &[f64],
    w_nu: W,
) -> Result<DensityEstimate>
where
    W: Fn(f64) -> f64 + Sync,
{
    if x_grid.is_empty() {
        return Err(Error::EmptyInput("density x-grid is empty".into()));
    }
    if !(cutoff > 0.0) {
        return Err(Error::invalid(format!(
            "density cutoff must be positive, got {cutoff}"
        )));
    }
    let last = psi.last_valid_u();
    let truncated = cutoff > last;
    let used = cutoff.min(last);
    if !(used > 0.0) {
        return Err(Error::invalid(
            "psi_n has no valid frequencies for the density estimate",
        ));
    }
    let (s2, g, l) = (est.sigma2.value, est.gamma.value, est.lambda.value);
    let du = psi.grid.du;
    let kmax = ((used / du) + 1e-9).floor() as usize;
    let kmax = kmax.min(psi.valid_len() - 1);
    let weighted: Vec<(f64, Complex64)> = (0..=kmax)
        .map(|k| {
            let u = psi.grid.node(k);
            let rem = psi.psi[k] + Complex64::new(0.5 * s2 * u * u + l, -g * u);
            (u, rem * w_nu(u / used))
        })
        .collect();

    let values: Vec<Complex64> = x_grid
        .par_iter()
        .map(|&x| {
            let mut acc = weighted[0].1;
            for &(u, h) in &weighted[1..] {
                let e = Complex64::new(0.0, -u * x).exp();
                // nodes u and -u, the latter carrying conj(h)
                acc += e * h + e.conj() * h.conj();
            }
            acc * (du / (2.0 * PI))
        })
        .collect();

    let nu: Vec<f64> = values.iter().map(|z| z.re).collect();
    let max_imag_residue = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mass = x_grid
        .windows(2)
        .zip(nu.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum();
    Ok(DensityEstimate {
        x: x_grid.to_vec(),
        nu,
        requested_cutoff: cutoff,
        cutoff: used,
        truncated,
        mass,
        max_imag_residue,
    })
}

/// [`estimate_levy_density_with`] using [`flat_top_weight`].
pub fn estimate_levy_density(
    psi: &PsiEstimate,
    est: &EstimationResult,
    cutoff: f64,
    x_grid: &[f64],
) -> Result<DensityEstimate> {
    estimate_levy_density_with(psi, est, cutoff, x_grid, flat_top_weight)
}

/// End-to-end settings for estimating from raw observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSettings {
    pub cutoffs: Cutoffs,
    #[serde(default)]
    pub base: BaseWeight,
    /// Numerical zero for `Phi_n`; defaults to `2 / sqrt(n)`.
    #[serde(default)]
    pub zero_floor: Option<f64>,
}

impl EstimationSettings {
    pub fn new(cutoffs: Cutoffs) -> Self {
        Self {
            cutoffs,
            base: BaseWeight::default(),
            zero_floor: None,
        }
    }

    /// Frequency grid serving every cutoff.
    pub fn grid(&self) -> Result<UGrid> {
        UGrid::for_cutoff(self.cutoffs.max())
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for (name, u) in [
            ("sigma", self.cutoffs.sigma),
            ("lambda", self.cutoffs.lambda),
            ("gamma", self.cutoffs.gamma),
        ] {
            if !(u > 0.0) || !u.is_finite() {
                return Err(Error::invalid(format!(
                    "cutoff for {name} must be positive, got {u}"
                )));
            }
        }
        if let Some(f) = self.zero_floor {
            if !(f > 0.0) {
                return Err(Error::invalid("zero_floor must be positive"));
            }
        }
        Ok(())
    }
}

/// Grid refinements tried when the phase moves too fast for the default step.
const REFINEMENTS: [usize; 3] = [1, 4, 16];

/// `psi_n` from raw observations on the settings' grid, refining the grid
/// if phase unwrapping needs it.
pub fn psi_from_samples(
    samples: &[f64],
    kernel: KernelAlpha,
    settings: &EstimationSettings,
) -> Result<PsiEstimate> {
    let grid = settings.grid()?;
    let mut last_err = None;
    for factor in REFINEMENTS {
        let ecf = EcfGrid::from_samples(samples, grid.refined(factor))?;
        let floor = settings.zero_floor.unwrap_or_else(|| ecf.default_floor());
        match spectral::psi_n_eval_with_floor(&ecf, kernel, floor) {
            Err(e @ Error::GridTooCoarse { .. }) => last_err = Some(e),
            other => return other,
        }
    }
    Err(last_err.expect("at least one refinement attempted"))
}

/// Estimate `(sigma^2, lambda, gamma)` from raw observations.
pub fn estimate_from_samples(
    samples: &[f64],
    kernel: KernelAlpha,
    settings: &EstimationSettings,
) -> Result<(EstimationResult, PsiEstimate)> {
    settings.validate()?;
    let psi = psi_from_samples(samples, kernel, settings)?;
    let est = estimate_parameters(&psi, settings.base, settings.cutoffs)?;
    Ok((est, psi))
}
