//! Command-line front end. The `levy-ma` binary only forwards its arguments
//! to [`run`].
//!
//! Configuration is a single JSON document with a `version` field; flags
//! override file values. Exit codes: 0 success, 1 runtime failure,
//! 2 validation error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{self, McDesign, Param};
use crate::error::{Error, Result};
use crate::estimate::{self, Cutoffs, EstimationSettings};
use crate::io::{self, BenchSummary, EstimateRecord, SCHEMA_VERSION};
use crate::model::{JumpDensity, KernelAlpha, LevyTriplet};
use crate::simulate::{simulate_path, SimConfig};
use crate::weights::{BaseWeight, WeightFamily};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "levy-ma",
    about = "Simulate and estimate moving-average Lévy-driven processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sample path and write `path.csv`.
    Simulate(CommonArgs),
    /// Estimate (sigma^2, lambda, gamma) and optionally the Lévy density from a path CSV.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Path CSV with header `t,z`; overrides `estimation.input`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the Monte Carlo design and write report files.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Write the estimating weights for one cutoff to `weights.csv`.
    WeightsDump {
        #[command(flatten)]
        common: CommonArgs,
        /// Cutoff U; overrides `weights.cutoff`.
        #[arg(long)]
        cutoff: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Suppress the summary printed on success.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub jumps: Option<JumpDensity>,
}

impl ModelSection {
    pub fn kernel(&self) -> Result<KernelAlpha> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::invalid("model.alpha is required"))?;
        KernelAlpha::new(alpha)
    }

    /// Triplet with unset fields taken from the reference experiment.
    pub fn triplet(&self) -> Result<LevyTriplet> {
        let r = LevyTriplet::reference();
        LevyTriplet::new(
            self.gamma.unwrap_or(r.gamma),
            self.sigma.unwrap_or(r.sigma),
            self.lambda.unwrap_or(r.lambda),
            self.jumps.clone().unwrap_or(r.jumps),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub t_start: Option<f64>,
    #[serde(default)]
    pub record_jumps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Defaults to the lambda cutoff.
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    pub input: Option<PathBuf>,
    /// Defaults to the reference table entry for `(alpha, n)` when available.
    pub cutoffs: Option<Cutoffs>,
    pub base: Option<BaseWeight>,
    pub zero_floor: Option<f64>,
    pub density: Option<DensitySection>,
    #[serde(default)]
    pub write_psi: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub cutoff: Option<f64>,
    pub base: Option<BaseWeight>,
    pub points: Option<usize>,
}

/// Top-level configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub bench: Option<McDesign>,
    #[serde(default)]
    pub weights: WeightsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            model: ModelSection::default(),
            simulation: SimulationSection::default(),
            estimation: EstimationSection::default(),
            bench: None,
            weights: WeightsSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = io::read_json(path)?;
        if cfg.version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    fn apply_overrides(&mut self, common: &CommonArgs) {
        if let Some(a) = common.alpha {
            self.model.alpha = Some(a);
        }
        if let Some(n) = common.n {
            self.simulation.n = Some(n);
        }
        if let Some(s) = common.seed {
            self.simulation.seed = Some(s);
            if let Some(b) = self.bench.as_mut() {
                b.base_seed = s;
            }
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let n = self
            .simulation
            .n
            .ok_or_else(|| Error::invalid("simulation.n is required"))?;
        let cfg = SimConfig {
            triplet: self.model.triplet()?,
            kernel: self.model.kernel()?,
            delta: self.simulation.delta.unwrap_or(1.0),
            n,
            seed: self.simulation.seed.unwrap_or(0),
            t_start: self.simulation.t_start.unwrap_or(0.0),
            record_jumps: self.simulation.record_jumps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Estimation settings for `n_obs` observations.
    pub fn estimation_settings(&self, n_obs: usize) -> Result<EstimationSettings> {
        let kernel = self.model.kernel()?;
        let cutoffs = match self.estimation.cutoffs {
            Some(c) => c,
            None => reference_cutoffs(kernel.alpha(), n_obs).ok_or_else(|| {
                Error::invalid(format!(
                    "estimation.cutoffs not given and no reference cutoffs for alpha = {}",
                    kernel.alpha()
                ))
            })?,
        };
        let settings = EstimationSettings {
            cutoffs,
            base: self.estimation.base.unwrap_or_default(),
            zero_floor: self.estimation.zero_floor,
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn design(&self) -> McDesign {
        self.bench.clone().unwrap_or_default()
    }
}

/// Reference cutoffs for `alpha` at the tabulated sample size closest to `n`.
pub fn reference_cutoffs(alpha: f64, n: usize) -> Option<Cutoffs> {
    let nearest = *bench::REFERENCE_NS.iter().min_by_key(|m| m.abs_diff(n))?;
    Some(Cutoffs {
        sigma: bench::reference_cutoff(Param::Sigma2, alpha, nearest)?,
        lambda: bench::reference_cutoff(Param::Lambda, alpha, nearest)?,
        gamma: bench::reference_cutoff(Param::Gamma, alpha, nearest)?,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::EmptyInput(_) | Error::Csv { .. } | Error::Json(_) => {
            EXIT_VALIDATION
        }
        _ => EXIT_RUNTIME,
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(common);
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn echo(cfg: &RunConfig) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(cfg)?);
    Ok(())
}

macro_rules! say {
    ($common:expr, $($arg:tt)*) => {
        if !$common.quiet {
            println!($($arg)*);
        }
    };
}

pub fn cmd_simulate(common: &CommonArgs) -> Result<()> {
    let cfg = load_config(common)?;
    let sim = cfg.sim_config()?;
    if common.dry_run {
        return echo(&cfg);
    }
    let path = simulate_path(&sim)?;
    ensure_dir(&common.out)?;
    io::write_path_csv(&common.out.join("path.csv"), &path)?;
    if let Some(j) = &path.jump_record {
        io::write_jumps_csv(&common.out.join("jumps.csv"), j)?;
    }
    say!(common, "n            {}", path.len());
    say!(
        common,
        "mean         {:.6}  (stationary {:.6})",
        path.mean(),
        sim.stationary_mean()
    );
    say!(
        common,
        "variance     {:.6}  (stationary {:.6})",
        path.variance(),
        sim.stationary_autocov(0.0)?
    );
    Ok(())
}

pub fn cmd_estimate(common: &CommonArgs, input: Option<&Path>) -> Result<()> {
    let cfg = load_config(common)?;
    let kernel = cfg.model.kernel()?;
    let input = input
        .map(Path::to_path_buf)
        .or_else(|| cfg.estimation.input.clone())
        .ok_or_else(|| Error::invalid("no input path (use --input or estimation.input)"))?;
    if common.dry_run {
        return echo(&cfg);
    }
    let (_, values) = io::read_path_csv(&input)?;
    let settings = cfg.estimation_settings(values.len())?;
    let (result, psi) = estimate::estimate_from_samples(&values, kernel, &settings)?;
    ensure_dir(&common.out)?;
    if result.truncated() {
        eprintln!(
            "warning: psi_n has its first zero at u = {:.4}; at least one cutoff was clamped",
            result.x0n
        );
    }
    let record = EstimateRecord {
        schema_version: SCHEMA_VERSION,
        alpha: kernel.alpha(),
        n_obs: values.len(),
        result,
    };
    io::write_json(&common.out.join("estimate.json"), &record)?;
    if cfg.estimation.write_psi {
        io::write_psi_csv(&common.out.join("psi.csv"), &psi)?;
    }
    if let Some(d) = &cfg.estimation.density {
        if d.points < 2 || !(d.x_max > d.x_min) {
            return Err(Error::invalid(
                "density grid needs x_max > x_min and at least 2 points",
            ));
        }
        let step = (d.x_max - d.x_min) / (d.points - 1) as f64;
        let xs: Vec<f64> = (0..d.points).map(|i| d.x_min + i as f64 * step).collect();
        let cutoff = d.cutoff.unwrap_or(settings.cutoffs.lambda);
        let dens = estimate::estimate_levy_density(&psi, &result, cutoff, &xs)?;
        io::write_density_csv(&common.out.join("density.csv"), &dens)?;
    }
    say!(
        common,
        "sigma2_hat   {:.6}  (U = {})",
        result.sigma2_hat(),
        result.sigma2.cutoff
    );
    say!(
        common,
        "lambda_hat   {:.6}  (U = {})",
        result.lambda_hat(),
        result.lambda.cutoff
    );
    say!(
        common,
        "gamma_hat    {:.6}  (U = {})",
        result.gamma_hat(),
        result.gamma.cutoff
    );
    Ok(())
}

/// Returns `true` when at least one cell failed in every replication.
pub fn cmd_bench(common: &CommonArgs, replications: Option<usize>) -> Result<bool> {
    let mut cfg = load_config(common)?;
    let mut design = cfg.design();
    if let Some(r) = replications {
        design.replications = r;
    }
    if let Some(s) = common.seed {
        design.base_seed = s;
    }
    if let Some(a) = common.alpha {
        design.alphas = vec![a];
    }
    if let Some(n) = common.n {
        design.ns = vec![n];
    }
    design.validate()?;
    cfg.bench = Some(design.clone());
    if common.dry_run {
        echo(&cfg)?;
        return Ok(false);
    }
    let report = bench::run_mc(&design)?;
    ensure_dir(&common.out)?;
    io::write_report_csv(&common.out.join("report.csv"), &report)?;
    io::write_boxplot_dat(&common.out.join("boxplot.dat"), &report)?;
    let fully_failed_cells = report.cells.iter().filter(|c| c.fully_failed()).count();
    let summary = BenchSummary {
        schema_version: SCHEMA_VERSION,
        selected_cutoffs: report.selected_table(),
        failed_replications: report.failed_replications,
        fully_failed_cells,
    };
    io::write_json(&common.out.join("summary.json"), &summary)?;
    for cell in &report.cells {
        if let Some(s) = cell.selected_summary() {
            say!(
                common,
                "{:<7} alpha={:<4} n={:<6} U={:<6} median err={:+.4} fails={}",
                cell.param.name(),
                cell.alpha,
                cell.n,
                s.cutoff,
                s.summary.map_or(f64::NAN, |f| f.q2),
                s.fail_count
            );
        }
    }
    Ok(fully_failed_cells > 0)
}

pub fn cmd_weights_dump(common: &CommonArgs, cutoff: Option<f64>) -> Result<()> {
    let cfg = load_config(common)?;
    let cutoff = cutoff.or(cfg.weights.cutoff).ok_or_else(|| {
        Error::invalid("weights cutoff is required (use --cutoff or weights.cutoff)")
    })?;
    let fam = WeightFamily::new(cfg.weights.base.unwrap_or_default(), cutoff)?;
    if common.dry_run {
        return echo(&cfg);
    }
    ensure_dir(&common.out)?;
    io::write_weights_csv(
        &common.out.join("weights.csv"),
        &fam,
        cfg.weights.points.unwrap_or(501),
    )
}

/// Parse `args` (including the program name) and dispatch; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(c) => cmd_simulate(c).map(|_| false),
        Command::Estimate { common, input } => {
            cmd_estimate(common, input.as_deref()).map(|_| false)
        }
        Command::Bench {
            common,
            replications,
        } => cmd_bench(common, *replications),
        Command::WeightsDump { common, cutoff } => cmd_weights_dump(common, *cutoff).map(|_| false),
    };
    match outcome {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("error: at least one bench cell failed in every replication");
            EXIT_RUNTIME
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
