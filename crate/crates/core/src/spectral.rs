//! Empirical characteristic function and the branch-tracked plug-in
//! estimator of the characteristic exponent,
//! `psi_n(u) = (alpha log Phi_n(u) + u Phi_n'(u) / Phi_n(u)) / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::KernelAlpha;
use crate::simulate::SamplePath;

/// Uniform frequency grid `u_k = k du`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UGrid {
    pub du: f64,
    pub len: usize,
}

impl UGrid {
    pub fn new(du: f64, len: usize) -> Result<Self> {
        if !(du > 0.0) || !du.is_finite() || len < 2 {
            return Err(Error::invalid("u-grid needs du > 0 and at least two nodes"));
        }
        Ok(Self { du, len })
    }

    /// Grid with `du = min(0.01, u_max / 500)` reaching `1.2 u_max`.
    pub fn for_cutoff(u_max: f64) -> Result<Self> {
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(Error::invalid(format!(
                "cutoff must be positive, got {u_max}"
            )));
        }
        let du = (u_max / 500.0).min(0.01);
        let len = (1.2 * u_max / du).ceil() as usize + 1;
        Self::new(du, len)
    }

    /// Same reach with the step divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            du: self.du / factor as f64,
            len: (self.len - 1) * factor + 1,
        }
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.du
    }

    pub fn upper(&self) -> f64 {
        self.node(self.len - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.node(k)).collect()
    }
}

/// `Phi_n` and `Phi_n'` on a [`UGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct EcfGrid {
    pub grid: UGrid,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    /// Number of observations, `None` when built from an exact characteristic function.
    pub n_obs: Option<usize>,
}

impl EcfGrid {
    /// Empirical characteristic function of `samples` and its exact derivative.
    pub fn from_samples(samples: &[f64], grid: UGrid) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput(
                "no observations for the empirical characteristic function".into(),
            ));
        }
        let inv_n = 1.0 / samples.len() as f64;
        let (phi, dphi): (Vec<_>, Vec<_>) = (0..grid.len)
            .into_par_iter()
            .map(|k| {
                let u = grid.node(k);
                let mut c = 0.0;
                let mut s = 0.0;
                let mut zc = 0.0;
                let mut zs = 0.0;
                for &z in samples {
                    let (sin, cos) = (u * z).sin_cos();
                    c += cos;
                    s += sin;
                    zc += z * cos;
                    zs += z * sin;
                }
                // d/du e^{iuz} = i z e^{iuz}
                (
                    Complex64::new(c * inv_n, s * inv_n),
                    Complex64::new(-zs * inv_n, zc * inv_n),
                )
            })
            .unzip();
        Ok(Self {
            grid,
            phi,
            dphi,
            n_obs: Some(samples.len()),
        })
    }

    /// Tabulate an exact characteristic function and its derivative.
    pub fn from_fn<F>(grid: UGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<(Complex64, Complex64)> + Sync,
    {
        let pairs = (0..grid.len)
            .into_par_iter()
            .map(|k| f(grid.node(k)))
            .collect::<Result<Vec<_>>>()?;
        let (phi, dphi) = pairs.into_iter().unzip();
        Ok(Self {
            grid,
            phi,
            dphi,
            n_obs: None,
        })
    }

    /// Noise-level floor `2 / sqrt(n)` used as the numerical zero of `Phi_n`;
    /// exact inputs use the smallest positive normal number.
    pub fn default_floor(&self) -> f64 {
        match self.n_obs {
            Some(n) => 2.0 / (n as f64).sqrt(),
            None => f64::MIN_POSITIVE,
        }
    }
}

/// `Phi_n` and `Phi_n'` of the observed path.
pub fn ecf_eval(path: &SamplePath, grid: UGrid) -> Result<EcfGrid> {
    EcfGrid::from_samples(&path.values, grid)
}

/// Index of the first node with `|Phi_n| < floor`, if any.
fn first_zero_index(ecf: &EcfGrid, floor: f64) -> Option<usize> {
    ecf.phi.iter().position(|p| p.norm() < floor)
}

/// Smallest grid frequency where `|Phi_n(u)| < floor`, or the grid end.
pub fn first_zero_detect(ecf: &EcfGrid, floor: f64) -> f64 {
    match first_zero_index(ecf, floor) {
        Some(k) => ecf.grid.node(k),
        None => ecf.grid.upper(),
    }
}

/// Plug-in estimate of `psi` on `[0, x0n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiEstimate {
    pub grid: UGrid,
    pub alpha: f64,
    /// `psi_n(u_k)`; `NaN` past the first zero.
    pub psi: Vec<Complex64>,
    pub valid: Vec<bool>,
    /// Winding number of the continuous logarithm relative to the principal branch.
    pub branch: Vec<i64>,
    pub x0n: f64,
}

/// Build `psi_n` from an [`EcfGrid`] using the given zero floor.
///
/// The logarithm is continued from `log Phi_n(0) = 0`: each step picks the
/// `2 pi` shift that brings the phase increment closest to the trapezoid
/// integral of `Im(Phi_n' / Phi_n)`, which is the exact phase derivative.
pub fn psi_n_eval_with_floor(ecf: &EcfGrid, k: KernelAlpha, floor: f64) -> Result<PsiEstimate> {
    let grid = ecf.grid;
    if !(floor > 0.0) {
        return Err(Error::invalid("zero floor must be positive"));
    }
    let zero = first_zero_index(ecf, floor);
    let n_valid = zero.unwrap_or(grid.len);
    let x0n = first_zero_detect(ecf, floor);
    let alpha = k.alpha();

    let mut psi = vec![Complex64::new(f64::NAN, f64::NAN); grid.len];
    let mut valid = vec![false; grid.len];
    let mut branch = vec![0i64; grid.len];

    let mut phase = 0.0;
    let mut prev_arg = 0.0;
    let mut prev_rate = 0.0;
    for idx in 0..n_valid {
        let p = ecf.phi[idx];
        let ratio = ecf.dphi[idx] / p;
        let arg = p.arg();
        let rate = ratio.im;
        if idx == 0 {
            phase = arg;
        } else {
            let predicted = 0.5 * grid.du * (prev_rate + rate);
            if predicted.abs() > PI {
                return Err(Error::GridTooCoarse {
                    u: grid.node(idx),
                    increment: predicted,
                });
            }
            let raw = arg - prev_arg;
            let shift = ((predicted - raw) / (2.0 * PI)).round();
            phase += raw + 2.0 * PI * shift;
        }
        branch[idx] = ((phase - arg) / (2.0 * PI)).round() as i64;
        let log = Complex64::new(p.norm().ln(), phase);
        psi[idx] = (log * alpha + ratio * grid.node(idx)) * 0.5;
        valid[idx] = true;
        prev_arg = arg;
        prev_rate = rate;
    }
    if n_valid > 0 {
        // exact zero at the origin
        psi[0] = Complex64::new(0.0, 0.0);
    }
    Ok(PsiEstimate {
        grid,
        alpha,
        psi,
        valid,
        branch,
        x0n,
    })
}

/// [`psi_n_eval_with_floor`] with the default floor of the input.
pub fn psi_n_eval(ecf: &EcfGrid, k: KernelAlpha) -> Result<PsiEstimate> {
    psi_n_eval_with_floor(ecf, k, ecf.default_floor())
}

const INTERP_POINTS: usize = 6;

impl PsiEstimate {
    /// Number of leading valid nodes.
    pub fn valid_len(&self) -> usize {
        self.valid.iter().take_while(|v| **v).count()
    }

    /// Largest frequency at which `psi_n` is available.
    pub fn last_valid_u(&self) -> f64 {
        self.grid.node(self.valid_len().saturating_sub(1))
    }

    /// `psi_n(u)` at an arbitrary frequency by local Lagrange interpolation
    /// (six nodes) on the valid range; negative `u` via conjugation.
    pub fn value_at(&self, u: f64) -> Option<Complex64> {
        if u < 0.0 {
            return self.value_at(-u).map(|z| z.conj());
        }
        let m = self.valid_len();
        if m == 0 || u > self.last_valid_u() + 1e-12 * self.grid.du {
            return None;
        }
        let du = self.grid.du;
        let pos = u / du;
        let k = pos.round() as usize;
        if (pos - k as f64).abs() < 1e-12 && k < m {
            return Some(self.psi[k]);
        }
        let npts = INTERP_POINTS.min(m);
        let center = pos.floor() as isize - (npts as isize / 2 - 1);
        let start = center.clamp(0, (m - npts) as isize) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in start..start + npts {
            let mut li = 1.0;
            for j in start..start + npts {
                if j != i {
                    li *= (pos - j as f64) / (i as f64 - j as f64);
                }
            }
            acc += self.psi[i] * li;
        }
        Some(acc)
    }

    /// Values on the negative half-line by Hermitian symmetry.
    pub fn mirrored(&self, k: usize) -> Complex64 {
        self.psi[k].conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{self, JumpDensity, LevyTriplet};

    #[test]
    fn ecf_of_zero_path_and_single_point() {
        let g = UGrid::new(0.1, 20).unwrap();
        let e = EcfGrid::from_samples(&[0.0; 7], g).unwrap();
        for k in 0..g.len {
            assert_eq!(e.phi[k], Complex64::new(1.0, 0.0));
            assert_eq!(e.dphi[k], Complex64::new(0.0, 0.0));
        }
        let c = 1.7;
        let e = EcfGrid::from_samples(&[c], g).unwrap();
        for k in 0..g.len {
            let u = g.node(k);
            let want = Complex64::new(0.0, u * c).exp();
            assert!((e.phi[k] - want).norm() < 1e-15);
            assert!((e.dphi[k] - Complex64::new(0.0, c) * want).norm() < 1e-14);
        }
        assert!(EcfGrid::from_samples(&[], g).is_err());
    }

    #[test]
    fn ecf_invariants() {
        let g = UGrid::new(0.05, 100).unwrap();
        let data = [0.3, -1.2, 2.5, 4.0, 0.0, 1.1];
        let e = EcfGrid::from_samples(&data, g).unwrap();
        assert_eq!(e.phi[0], Complex64::new(1.0, 0.0));
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        assert!((e.dphi[0] - Complex64::new(0.0, mean)).norm() < 1e-15);
        assert!(e.phi.iter().all(|p| p.norm() <= 1.0 + 1e-15));
    }

    #[test]
    fn first_zero_examples() {
        let g = UGrid::new(0.001, 2001).unwrap();
        let e = EcfGrid::from_samples(&[-PI, PI], g).unwrap();
        let x0 = first_zero_detect(&e, 1e-3);
        assert!((x0 - 0.5).abs() <= g.du + 1e-12, "x0 = {x0}");
        assert!(first_zero_detect(&e, 1e-4) >= first_zero_detect(&e, 1e-2));

        let g = UGrid::new(0.01, 50).unwrap();
        let e = EcfGrid::from_fn(g, |u| {
            Ok((
                Complex64::new(0.5 + 0.5 * (-u).exp(), 0.0),
                Complex64::new(0.0, 0.0),
            ))
        })
        .unwrap();
        assert_eq!(first_zero_detect(&e, 0.1), g.upper());
    }

    #[test]
    fn gaussian_exact_inversion() {
        let t = LevyTriplet::new(0.0, 1.0, 0.0, JumpDensity::default()).unwrap();
        let k = KernelAlpha::new(0.5).unwrap();
        let g = UGrid::new(0.01, 301).unwrap();
        let e = EcfGrid::from_fn(g, |u| {
            Ok((model::phi(&t, k, u)?, model::phi_derivative(&t, k, u)?))
        })
        .unwrap();
        let p = psi_n_eval(&e, k).unwrap();
        assert_eq!(p.psi[0], Complex64::new(0.0, 0.0));
        assert!((p.psi[200] - Complex64::new(-2.0, 0.0)).norm() < 1e-8);
        assert!((p.value_at(-2.0).unwrap() - Complex64::new(-2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn unwrapping_tracks_fast_drift() {
        // Phi(u) = exp(i 40 u): phase wraps many times on [0, 3]
        let c = 40.0;
        let g = UGrid::new(0.01, 301).unwrap();
        let e = EcfGrid::from_samples(&[c], g).unwrap();
        let p = psi_n_eval_with_floor(&e, KernelAlpha::new(0.8).unwrap(), 0.5).unwrap();
        for k in 0..g.len {
            let u = g.node(k);
            // psi = (alpha i c u + u i c)/2
            let want = Complex64::new(0.0, 0.5 * (0.8 * c * u + u * c));
            assert!((p.psi[k] - want).norm() < 1e-9, "u = {u}");
        }
        assert!(p.branch[300] > 0);
    }

    #[test]
    fn too_coarse_grid_is_reported() {
        let g = UGrid::new(0.5, 10).unwrap();
        let e = EcfGrid::from_samples(&[40.0], g).unwrap();
        assert!(matches!(
            psi_n_eval_with_floor(&e, KernelAlpha::new(0.5).unwrap(), 0.5),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn invalid_past_first_zero() {
        let g = UGrid::new(0.001, 1001).unwrap();
        let e = EcfGrid::from_samples(&[-PI, PI], g).unwrap();
        let p = psi_n_eval_with_floor(&e, KernelAlpha::new(0.5).unwrap(), 1e-3).unwrap();
        assert!(p.valid[..400].iter().all(|v| *v));
        assert!(!p.valid[600]);
        assert!(p.psi[600].re.is_nan());
        assert!(p.value_at(0.7).is_none());
    }

    #[test]
    fn interpolation_is_exact_on_quadratics() {
        let g = UGrid::new(0.05, 40).unwrap();
        let psi: Vec<_> = (0..g.len)
            .map(|k| {
                let u = g.node(k);
                Complex64::new(-1.3 * u * u - 0.4, 2.0 * u)
            })
            .collect();
        let p = PsiEstimate {
            grid: g,
            alpha: 0.5,
            psi,
            valid: vec![true; g.len],
            branch: vec![0; g.len],
            x0n: g.upper(),
        };
        for u in [0.013, 0.51, 1.0, 1.93] {
            let v = p.value_at(u).unwrap();
            assert!((v - Complex64::new(-1.3 * u * u - 0.4, 2.0 * u)).norm() < 1e-12);
        }
    }
}
