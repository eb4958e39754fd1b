//! Simulation and Fourier-based semiparametric estimation for continuous-time
//! moving-average processes `Z_t = ∫ K_alpha(t - s) dL_s` driven by a Lévy
//! process `L` with drift, Brownian part and compound-Poisson jumps.
//!
//! The pipeline, bottom-up:
//!
//! * [`model`]: the kernel family `K_alpha`, the Lévy triplet and exact
//!   characteristic functions (`psi`, `Psi`, `Phi`).
//! * [`simulate`]: exact simulation of equidistant observations.
//! * [`spectral`]: the empirical characteristic function and the
//!   branch-tracked plug-in estimate `psi_n` of the characteristic exponent.
//! * [`weights`]: estimating weights for the spectral least-squares fits.
//! * [`estimate`]: estimators of `sigma^2`, `lambda`, `gamma` and the Lévy density.
//! * [`bench`]: Monte Carlo harness with cutoff selection and rate diagnostics.
//!
//! ```
//! use levy_ma::prelude::*;
//!
//! let kernel = KernelAlpha::new(0.8)?;
//! let cfg = SimConfig::new(LevyTriplet::reference(), kernel, 2000, 7);
//! let path = simulate_path(&cfg)?;
//! let settings = EstimationSettings::new(Cutoffs { sigma: 8.5, lambda: 3.5, gamma: 2.75 });
//! let (est, _psi) = estimate_from_samples(&path.values, kernel, &settings)?;
//! assert!((est.gamma_hat() - 5.0).abs() < 1.0);
//! # Ok::<(), levy_ma::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod simulate;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bench::{run_mc, CutoffPolicy, McDesign, McReport, Param, RateSpec};
    pub use crate::estimate::{
        estimate_from_samples, estimate_levy_density, estimate_parameters, flat_top_weight,
        Cutoffs, EstimationResult, EstimationSettings,
    };
    pub use crate::model::{JumpDensity, KernelAlpha, LevyTriplet};
    pub use crate::simulate::{simulate_path, SamplePath, SimConfig};
    pub use crate::spectral::{psi_n_eval, EcfGrid, PsiEstimate, UGrid};
    pub use crate::weights::{BaseWeight, WeightFamily};
    pub use crate::Error;
}
