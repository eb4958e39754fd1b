//! Monte Carlo harness: replicated simulation and estimation over a grid of
//! kernel parameters, sample sizes and spectral cutoffs, with boxplot
//! summaries, cutoff selection and log-log rate diagnostics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{self, ParamEstimate};
use crate::estimate::{Cutoffs, EstimationSettings};
use crate::model::{KernelAlpha, LevyTriplet};
use crate::simulate::{simulate_path, SimConfig};
use crate::spectral::PsiEstimate;
use crate::weights::BaseWeight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Sigma2,
    Lambda,
    Gamma,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Sigma2, Param::Lambda, Param::Gamma];

    pub fn name(&self) -> &'static str {
        match self {
            Param::Sigma2 => "sigma2",
            Param::Lambda => "lambda",
            Param::Gamma => "gamma",
        }
    }

    pub fn truth(&self, t: &LevyTriplet) -> f64 {
        match self {
            Param::Sigma2 => t.sigma * t.sigma,
            Param::Lambda => t.lambda,
            Param::Gamma => t.gamma,
        }
    }
}

/// Cutoffs reported as optimal for the reference experiment, by parameter,
/// kernel parameter and sample size.
pub const REFERENCE_NS: [usize; 5] = [1000, 2000, 3000, 5000, 10000];
pub const REFERENCE_ALPHAS: [f64; 3] = [0.5, 0.8, 0.9];

const LAMBDA_TABLE: [[f64; 5]; 3] = [
    [1.2, 1.35, 1.4, 1.45, 1.55],
    [3.5, 3.5, 3.8, 4.0, 4.2],
    [4.5, 4.5, 4.6, 4.8, 5.1],
];
const GAMMA_TABLE: [[f64; 5]; 3] = [
    [0.8, 0.85, 1.0, 1.1, 1.3],
    [2.7, 2.75, 2.75, 2.8, 3.0],
    [3.0, 3.2, 3.2, 3.3, 3.5],
];
const SIGMA_TABLE: [[f64; 5]; 3] = [
    [8.0, 8.0, 8.0, 8.2, 8.5],
    [8.5, 8.55, 8.6, 8.7, 8.8],
    [8.75, 8.8, 8.8, 9.0, 9.2],
];

fn table_row(param: Param, alpha: f64) -> Option<&'static [f64; 5]> {
    let ai = REFERENCE_ALPHAS
        .iter()
        .position(|a| (a - alpha).abs() < 1e-12)?;
    Some(match param {
        Param::Sigma2 => &SIGMA_TABLE[ai],
        Param::Lambda => &LAMBDA_TABLE[ai],
        Param::Gamma => &GAMMA_TABLE[ai],
    })
}

/// Tabulated reference cutoff for `(param, alpha, n)`, if listed.
pub fn reference_cutoff(param: Param, alpha: f64, n: usize) -> Option<f64> {
    let ni = REFERENCE_NS.iter().position(|m| *m == n)?;
    table_row(param, alpha).map(|row| row[ni])
}

/// How the candidate cutoffs of each cell are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffPolicy {
    /// Only the tabulated reference cutoff for the cell.
    Reference,
    /// Step grid covering `[(1 - spread) min, (1 + spread) max]` of the
    /// tabulated row for the parameter and alpha.
    ReferenceNeighborhood { spread: f64, step: f64 },
    /// The same explicit candidates in every cell.
    Fixed {
        sigma2: Vec<f64>,
        lambda: Vec<f64>,
        gamma: Vec<f64>,
    },
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::ReferenceNeighborhood {
            spread: 0.5,
            step: 0.05,
        }
    }
}

impl CutoffPolicy {
    pub fn candidates(&self, param: Param, alpha: f64, n: usize) -> Result<Vec<f64>> {
        let missing = || {
            Error::invalid(format!(
                "no reference cutoff for {} at alpha = {alpha}, n = {n}",
                param.name()
            ))
        };
        match self {
            CutoffPolicy::Reference => {
                Ok(vec![reference_cutoff(param, alpha, n).ok_or_else(missing)?])
            }
            CutoffPolicy::ReferenceNeighborhood { spread, step } => {
                let row = table_row(param, alpha).ok_or_else(missing)?;
                let lo = row.iter().copied().fold(f64::INFINITY, f64::min) * (1.0 - spread);
                let hi = row.iter().copied().fold(0.0, f64::max) * (1.0 + spread);
                let k0 = (lo / step).ceil() as i64;
                let k1 = (hi / step + 1e-9).floor() as i64;
                let grid: Vec<f64> = (k0.max(1)..=k1).map(|k| k as f64 * step).collect();
                if grid.is_empty() {
                    return Err(Error::invalid("empty candidate cutoff grid"));
                }
                Ok(grid)
            }
            CutoffPolicy::Fixed {
                sigma2,
                lambda,
                gamma,
            } => {
                let v = match param {
                    Param::Sigma2 => sigma2,
                    Param::Lambda => lambda,
                    Param::Gamma => gamma,
                };
                if v.is_empty() {
                    return Err(Error::invalid(format!(
                        "no candidate cutoffs for {}",
                        param.name()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDesign {
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub triplet: LevyTriplet,
    pub base_seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub base: BaseWeight,
    #[serde(default)]
    pub cutoffs: CutoffPolicy,
}

fn default_delta() -> f64 {
    1.0
}

impl Default for McDesign {
    fn default() -> Self {
        Self {
            alphas: REFERENCE_ALPHAS.to_vec(),
            ns: REFERENCE_NS.to_vec(),
            replications: 25,
            triplet: LevyTriplet::reference(),
            base_seed: 1,
            delta: 1.0,
            base: BaseWeight::default(),
            cutoffs: CutoffPolicy::default(),
        }
    }
}

impl McDesign {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        if self.alphas.is_empty() || self.ns.is_empty() {
            return Err(Error::invalid("design needs at least one alpha and one n"));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) || self.ns[0] == 0 {
            return Err(Error::invalid(
                "sample sizes must be positive and strictly increasing",
            ));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        self.triplet.validate()?;
        self.base.validate()?;
        for &a in &self.alphas {
            KernelAlpha::new(a)?;
            for &n in &self.ns {
                for p in Param::ALL {
                    self.cutoffs.candidates(p, a, n)?;
                }
            }
        }
        Ok(())
    }
}

/// Five-number summary: minimum, lower quartile, median, upper quartile, maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl FiveNumber {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            q0: v[0],
            q1: quantile_sorted(&v, 0.25),
            q2: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            q4: v[v.len() - 1],
        })
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    FiveNumber::from_values(values).map(|f| f.q2)
}

/// Errors of one parameter at one candidate cutoff within a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub cutoff: f64,
    /// Estimator minus truth, in replication order; failed replications omitted.
    pub errors: Vec<f64>,
    pub fail_count: usize,
    pub truncated_count: usize,
    pub summary: Option<FiveNumber>,
}

impl CandidateSummary {
    pub fn median_abs_error(&self) -> Option<f64> {
        let abs: Vec<f64> = self.errors.iter().map(|e| e.abs()).collect();
        median(&abs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub param: Param,
    pub alpha: f64,
    pub n: usize,
    pub candidates: Vec<CandidateSummary>,
    /// Cutoff with the smallest median absolute error.
    pub selected: Option<f64>,
}

impl CellReport {
    pub fn selected_summary(&self) -> Option<&CandidateSummary> {
        let u = self.selected?;
        self.candidates.iter().find(|c| c.cutoff == u)
    }

    /// Whether every replication failed at every candidate.
    pub fn fully_failed(&self) -> bool {
        self.candidates.iter().all(|c| c.errors.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub design: McDesign,
    pub cells: Vec<CellReport>,
    /// Replications whose simulation or `psi_n` construction failed.
    pub failed_replications: usize,
}

impl McReport {
    pub fn cell(&self, param: Param, alpha: f64, n: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.param == param && (c.alpha - alpha).abs() < 1e-12 && c.n == n)
    }

    /// Selected cutoffs as `param -> alpha -> n -> U`.
    pub fn selected_table(&self) -> BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>> {
        let mut out: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>> = BTreeMap::new();
        for c in &self.cells {
            if let Some(u) = c.selected {
                out.entry(c.param.name().to_string())
                    .or_default()
                    .entry(format!("{}", c.alpha))
                    .or_default()
                    .insert(c.n.to_string(), u);
            }
        }
        out
    }
}

/// Candidate with the smallest median absolute error; ties go to the smaller cutoff.
pub fn select_un(candidates: &[CandidateSummary]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for c in candidates {
        let Some(m) = c.median_abs_error() else {
            continue;
        };
        best = match best {
            None => Some((c.cutoff, m)),
            Some((u, bm)) if m < bm || (m == bm && c.cutoff < u) => Some((c.cutoff, m)),
            keep => keep,
        };
    }
    best.map(|(u, _)| u)
}

/// Outcome of one replication: per parameter, per candidate, the estimate or a failure.
type RepOutcome = std::result::Result<Vec<Vec<Option<ParamEstimate>>>, Error>;

fn run_replication(
    design: &McDesign,
    alpha: f64,
    n: usize,
    rep: usize,
    cands: &[Vec<f64>],
) -> RepOutcome {
    let kernel = KernelAlpha::new(alpha)?;
    let mut cfg = SimConfig::new(
        design.triplet.clone(),
        kernel,
        n,
        design.base_seed.wrapping_add(rep as u64),
    );
    cfg.delta = design.delta;
    let path = simulate_path(&cfg)?;
    let u_max = cands.iter().flatten().copied().fold(0.0, f64::max);
    let settings = EstimationSettings {
        cutoffs: Cutoffs::uniform(u_max),
        base: design.base,
        zero_floor: None,
    };
    let psi: PsiEstimate = estimate::psi_from_samples(&path.values, kernel, &settings)?;
    Ok(Param::ALL
        .iter()
        .zip(cands)
        .map(|(p, us)| {
            us.iter()
                .map(|&u| {
                    let r = match p {
                        Param::Sigma2 => estimate::estimate_sigma2(&psi, design.base, u),
                        Param::Lambda => estimate::estimate_lambda(&psi, design.base, u),
                        Param::Gamma => estimate::estimate_gamma(&psi, design.base, u),
                    };
                    r.ok()
                })
                .collect()
        })
        .collect())
}

/// Run the full design. Replications execute in parallel; aggregation is
/// ordered by `(alpha, n, replication)` so reports are reproducible.
pub fn run_mc(design: &McDesign) -> Result<McReport> {
    design.validate()?;
    let mut cells_meta = Vec::new();
    for &alpha in &design.alphas {
        for &n in &design.ns {
            let cands = Param::ALL
                .iter()
                .map(|p| design.cutoffs.candidates(*p, alpha, n))
                .collect::<Result<Vec<_>>>()?;
            cells_meta.push((alpha, n, cands));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells_meta.len())
        .flat_map(|c| (0..design.replications).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<RepOutcome> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (alpha, n, cands) = &cells_meta[c];
            run_replication(design, *alpha, *n, r, cands)
        })
        .collect();

    let mut cells = Vec::new();
    let mut failed_replications = 0;
    for (ci, (alpha, n, cands)) in cells_meta.iter().enumerate() {
        let reps = &outcomes[ci * design.replications..(ci + 1) * design.replications];
        failed_replications += reps.iter().filter(|o| o.is_err()).count();
        for (pi, param) in Param::ALL.iter().enumerate() {
            let truth = param.truth(&design.triplet);
            let candidates: Vec<CandidateSummary> = cands[pi]
                .iter()
                .enumerate()
                .map(|(ui, &u)| {
                    let mut errors = Vec::new();
                    let mut fail_count = 0;
                    let mut truncated_count = 0;
                    for rep in reps {
                        match rep.as_ref().ok().and_then(|v| v[pi][ui]) {
                            Some(e) if e.value.is_finite() => {
                                errors.push(e.value - truth);
                                truncated_count += usize::from(e.truncated);
                            }
                            _ => fail_count += 1,
                        }
                    }
                    let summary = FiveNumber::from_values(&errors);
                    CandidateSummary {
                        cutoff: u,
                        errors,
                        fail_count,
                        truncated_count,
                        summary,
                    }
                })
                .collect();
            let selected = select_un(&candidates);
            cells.push(CellReport {
                param: *param,
                alpha: *alpha,
                n: *n,
                candidates,
                selected,
            });
        }
    }
    Ok(McReport {
        design: design.clone(),
        cells,
        failed_replications,
    })
}

/// Smoothness and parameter for a theoretical rate `U^{-(s + offset)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub s: u32,
    pub param: Param,
}

impl RateSpec {
    /// Exponent of `U_n` in the error bound: `s+3`, `s+2`, `s+1` for sigma², gamma, lambda.
    pub fn cutoff_exponent(&self) -> f64 {
        let offset = match self.param {
            Param::Sigma2 => 3.0,
            Param::Gamma => 2.0,
            Param::Lambda => 1.0,
        };
        self.s as f64 + offset
    }

    /// Exponent of `log n` when `U_n = sqrt(kappa log n)`.
    pub fn log_n_exponent(&self) -> f64 {
        self.cutoff_exponent() / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDiagnostic {
    pub param: Param,
    /// `(U, median |error|)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub theoretical_slope: f64,
    /// Set when the regression carries no information (constant errors or cutoffs).
    pub degenerate: bool,
}

/// Least-squares slope of `log(err)` against `log(U)`.
pub fn rate_fit(points: &[(f64, f64)], spec: RateSpec) -> Result<RateDiagnostic> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "rate check needs >= 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(u, e)| !(*u > 0.0) || !(*e > 0.0)) {
        return Err(Error::invalid(
            "rate check needs positive cutoffs and errors",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|(u, _)| u.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let y_const = ys
        .iter()
        .all(|y| (y - ys[0]).abs() <= 1e-12 * ys[0].abs().max(1.0));
    let degenerate = y_const || sxx <= 1e-24;
    let fitted_slope = if sxx > 1e-24 { sxy / sxx } else { 0.0 };
    Ok(RateDiagnostic {
        param: spec.param,
        points: points.to_vec(),
        fitted_slope: if y_const { 0.0 } else { fitted_slope },
        theoretical_slope: -spec.cutoff_exponent(),
        degenerate,
    })
}

/// Rate diagnostic across the sample sizes of one `alpha`, using the selected cutoffs.
pub fn rate_check(report: &McReport, spec: RateSpec, alpha: f64) -> Result<RateDiagnostic> {
    let points: Vec<(f64, f64)> = report
        .design
        .ns
        .iter()
        .filter_map(|&n| {
            let cell = report.cell(spec.param, alpha, n)?;
            let s = cell.selected_summary()?;
            Some((s.cutoff, s.median_abs_error()?))
        })
        .collect();
    rate_fit(&points, spec)
}
