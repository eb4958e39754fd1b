//! Monte Carlo study: error boxplot summaries, data-driven cutoff selection
//! and a log-log rate diagnostic.
//!
//! cargo run --release --example monte_carlo -- [replications] [seed] [out_dir]

use levy_ma::bench::{rate_check, run_mc, CutoffPolicy, McDesign, Param, RateSpec};
use levy_ma::io;

fn main() -> Result<(), levy_ma::Error> {
    let args: Vec<String> = std::env::args().collect();
    let reps: usize = args.get(1).map_or(10, |a| a.parse().expect("replications"));
    let seed: u64 = args.get(2).map_or(1, |a| a.parse().expect("seed"));
    let design = McDesign {
        alphas: vec![0.5, 0.9],
        ns: vec![1000, 3000, 10000],
        replications: reps,
        base_seed: seed,
        cutoffs: CutoffPolicy::ReferenceNeighborhood {
            spread: 0.5,
            step: 0.25,
        },
        ..McDesign::default()
    };
    let report = run_mc(&design)?;
    println!("failed replications: {}", report.failed_replications);
    println!(
        "{:<7} {:>5} {:>6} {:>6} {:>9} {:>9} {:>9}",
        "param", "alpha", "n", "U_n", "q1", "median", "q3"
    );
    for cell in &report.cells {
        let Some(s) = cell.selected_summary() else {
            continue;
        };
        let f = s.summary.expect("selected cutoff has errors");
        println!(
            "{:<7} {:>5} {:>6} {:>6} {:>+9.4} {:>+9.4} {:>+9.4}",
            cell.param.name(),
            cell.alpha,
            cell.n,
            s.cutoff,
            f.q1,
            f.q2,
            f.q3
        );
    }
    for alpha in &design.alphas {
        for param in Param::ALL {
            let d = rate_check(&report, RateSpec { s: 1, param }, *alpha)?;
            println!(
                "rate {:<7} alpha {alpha}: fitted slope {:+.2}, bound slope {:+.1}{}",
                param.name(),
                d.fitted_slope,
                d.theoretical_slope,
                if d.degenerate { " (degenerate)" } else { "" }
            );
        }
    }
    if let Some(dir) = args.get(3) {
        let dir = std::path::Path::new(dir);
        std::fs::create_dir_all(dir).map_err(|source| levy_ma::Error::Io {
            path: dir.into(),
            source,
        })?;
        io::write_report_csv(&dir.join("report.csv"), &report)?;
        io::write_boxplot_dat(&dir.join("boxplot.dat"), &report)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
