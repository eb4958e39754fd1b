//! CSV and JSON file formats. Numbers are written with 17 significant digits
//! so every file parses back to the identical `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::{McReport, Param};
use crate::error::{Error, Result};
use crate::estimate::{DensityEstimate, EstimationResult};
use crate::simulate::{Jump, SamplePath};
use crate::spectral::PsiEstimate;
use crate::weights::WeightFamily;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_lines<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(io_err(path))?;
    for row in rows {
        writeln!(w, "{row}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Two-column numeric CSV with the given header names.
fn read_two_columns(path: &Path, expected: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let csv_err = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    if headers.len() < 2 || headers[0] != *expected[0] || headers[1] != *expected[1] {
        if headers.is_empty() {
            return Err(Error::EmptyInput(format!(
                "{} has no header",
                path.display()
            )));
        }
        return Err(csv_err(format!(
            "expected header `{},{}`, found `{}`",
            expected[0],
            expected[1],
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| csv_err(format!("row {}: missing column {i}", line + 2)))?
                .parse::<f64>()
                .map_err(|e| csv_err(format!("row {}: {e}", line + 2)))
        };
        a.push(parse(0)?);
        b.push(parse(1)?);
    }
    Ok((a, b))
}

pub fn write_path_csv(path: &Path, sample: &SamplePath) -> Result<()> {
    write_lines(
        path,
        "t,z",
        sample
            .times
            .iter()
            .zip(&sample.values)
            .map(|(t, z)| format!("{},{}", fmt_f64(*t), fmt_f64(*z))),
    )
}

/// Observation times and values from a `t,z` CSV; rejects empty files.
pub fn read_path_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, z) = read_two_columns(path, ["t", "z"])?;
    if z.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} contains no observations",
            path.display()
        )));
    }
    Ok((t, z))
}

pub fn write_jumps_csv(path: &Path, jumps: &[Jump]) -> Result<()> {
    write_lines(
        path,
        "s,y",
        jumps
            .iter()
            .map(|j| format!("{},{}", fmt_f64(j.time), fmt_f64(j.size))),
    )
}

pub fn read_jumps_csv(path: &Path) -> Result<Vec<Jump>> {
    let (s, y) = read_two_columns(path, ["s", "y"])?;
    Ok(s.into_iter()
        .zip(y)
        .map(|(time, size)| Jump { time, size })
        .collect())
}

pub fn write_psi_csv(path: &Path, psi: &PsiEstimate) -> Result<()> {
    write_lines(
        path,
        "u,re_psi,im_psi,valid",
        (0..psi.grid.len).map(|k| {
            format!(
                "{},{},{},{}",
                fmt_f64(psi.grid.node(k)),
                fmt_f64(psi.psi[k].re),
                fmt_f64(psi.psi[k].im),
                u8::from(psi.valid[k])
            )
        }),
    )
}

pub fn write_density_csv(path: &Path, d: &DensityEstimate) -> Result<()> {
    write_lines(
        path,
        "x,nu",
        d.x.iter()
            .zip(&d.nu)
            .map(|(x, v)| format!("{},{}", fmt_f64(*x), fmt_f64(*v))),
    )
}

pub fn read_density_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    read_two_columns(path, ["x", "nu"])
}

/// `u,w_sigma,w_lambda,w_gamma` on `points` equally spaced nodes of `[0, U]`.
pub fn write_weights_csv(path: &Path, fam: &WeightFamily, points: usize) -> Result<()> {
    let points = points.max(2);
    let step = fam.cutoff / (points - 1) as f64;
    write_lines(
        path,
        "u,w_sigma,w_lambda,w_gamma",
        (0..points).map(|i| {
            let u = i as f64 * step;
            format!(
                "{},{},{},{}",
                fmt_f64(u),
                fmt_f64(fam.sigma(u)),
                fmt_f64(fam.lambda(u)),
                fmt_f64(fam.gamma(u))
            )
        }),
    )
}

/// One row per `(param, alpha, n, candidate U)`.
pub fn write_report_csv(path: &Path, report: &McReport) -> Result<()> {
    let mut rows = Vec::new();
    for cell in &report.cells {
        for c in &cell.candidates {
            let q = match c.summary {
                Some(f) => [f.q0, f.q1, f.q2, f.q3, f.q4].map(fmt_f64).join(","),
                None => ["NaN"; 5].join(","),
            };
            rows.push(format!(
                "{},{},{},{},{},{}",
                cell.param.name(),
                cell.alpha,
                cell.n,
                fmt_f64(c.cutoff),
                q,
                c.fail_count
            ));
        }
    }
    write_lines(path, "param,alpha,n,U,q0,q1,q2,q3,q4,fail_count", rows)
}

/// Whitespace-separated boxplot rows at the selected cutoffs, ordered for
/// gnuplot's `candlesticks` style (`x box_min whisker_min whisker_high box_high`).
pub fn write_boxplot_dat(path: &Path, report: &McReport) -> Result<()> {
    let mut rows = Vec::new();
    for param in Param::ALL {
        rows.push(String::new());
        rows.push(format!("# param {}", param.name()));
        for (idx, cell) in report.cells.iter().filter(|c| c.param == param).enumerate() {
            if let Some(f) = cell.selected_summary().and_then(|s| s.summary) {
                rows.push(format!(
                    "{} {} {} {} {} {} {} {} {}",
                    idx,
                    fmt_f64(f.q1),
                    fmt_f64(f.q0),
                    fmt_f64(f.q4),
                    fmt_f64(f.q3),
                    fmt_f64(f.q2),
                    cell.alpha,
                    cell.n,
                    fmt_f64(cell.selected.unwrap_or(f64::NAN)),
                ));
            }
        }
    }
    write_lines(path, "# index q1 q0 q4 q3 median alpha n U", rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub schema_version: u32,
    pub alpha: f64,
    pub n_obs: usize,
    pub result: EstimationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub selected_cutoffs: std::collections::BTreeMap<
        String,
        std::collections::BTreeMap<String, std::collections::BTreeMap<String, f64>>,
    >,
    pub failed_replications: usize,
    pub fully_failed_cells: usize,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}
