//! Surface-utilization comparison: for each node count, the face-budget
//! algorithm's analytic waste next to the relaxation algorithm's measured
//! coverage.

use std::io::{self, Write};

use sphere_layout::{run_wscvt, Error, LloydConfig, SolveOutcome};

/// What to compute per node count.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Node counts, one table row each.
    pub counts: Vec<usize>,
    /// When false, the relaxation columns are skipped and the table is
    /// purely analytic (instant for any count).
    pub with_wscvt: bool,
    /// Solver settings for the relaxation columns (equal weights).
    pub solver: LloydConfig,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            counts: vec![20, 50, 1000, 1500],
            with_wscvt: true,
            solver: LloydConfig::default(),
        }
    }
}

/// Writes the comparison table. A relaxation run that stalls marks its row
/// FAILED and the remaining rows still run.
pub fn report_comparison<W: Write>(opts: &ReportOptions, out: &mut W) -> io::Result<()> {
    if opts.with_wscvt {
        writeln!(
            out,
            "{:>6}  {:>7}  {:>15}  {:>22}  {:>11}  {:>10}",
            "n", "faces", "trisphere_waste", "wscvt_waste", "wscvt_error", "iterations"
        )?;
    } else {
        writeln!(out, "{:>6}  {:>7}  {:>15}", "n", "faces", "trisphere_waste")?;
    }

    for &n in &opts.counts {
        let placement = match sphere_layout::trisphere_layout(n) {
            Ok(p) => p,
            Err(e) => {
                writeln!(out, "{n:>6}  FAILED ({e})")?;
                continue;
            }
        };
        let faces = placement.stats.faces;
        let tri_waste = format!("{}%", placement.stats.waste_percent());
        if !opts.with_wscvt {
            writeln!(out, "{n:>6}  {faces:>7}  {tri_waste:>15}")?;
            continue;
        }

        // Equal weights: the comparison is about node capacity, the trees
        // behind each row all have uniform leaves.
        let weights = vec![1.0; n];
        match run_wscvt(&weights, &opts.solver) {
            Ok(outcome) => {
                let (residual, error, iters) = wscvt_columns(&outcome);
                writeln!(
                    out,
                    "{n:>6}  {faces:>7}  {tri_waste:>15}  {:>22}  {error:>11.3e}  {iters:>10}",
                    format!("0% (residual {residual:.1e})"),
                )?;
            }
            Err(Error::NotConverged(outcome)) => {
                let (_, error, iters) = wscvt_columns(&outcome);
                writeln!(
                    out,
                    "{n:>6}  {faces:>7}  {tri_waste:>15}  {:>22}  {error:>11.3e}  {iters:>10}",
                    "FAILED (stalled)",
                )?;
            }
            Err(e) => {
                writeln!(
                    out,
                    "{n:>6}  {faces:>7}  {tri_waste:>15}  {:>22}",
                    format!("FAILED ({e})"),
                )?;
            }
        }
    }
    Ok(())
}

/// Partition residual `|sum of area fractions - 1|`, final error, rounds.
fn wscvt_columns(outcome: &SolveOutcome) -> (f64, f64, usize) {
    let covered: f64 = outcome.tessellation.area_fractions().iter().sum();
    ((covered - 1.0).abs(), outcome.report.final_error, outcome.report.iterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_rows_print_exact_percentages() {
        let opts = ReportOptions {
            counts: vec![20, 50, 100, 1000, 1500],
            with_wscvt: false,
            solver: LloydConfig::default(),
        };
        let mut buf = Vec::new();
        report_comparison(&opts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("0%"));
        assert!(text.contains("37.5%"));
        assert!(text.contains("68.75%"));
        assert!(text.contains("21.875%"));
        assert!(text.contains("70.703125%"));
    }

    #[test]
    fn relaxation_rows_measure_full_coverage() {
        let opts = ReportOptions {
            counts: vec![20],
            with_wscvt: true,
            solver: LloydConfig::default(),
        };
        let mut buf = Vec::new();
        report_comparison(&opts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("0% (residual"), "row: {text}");
        assert!(!text.contains("FAILED"), "row: {text}");
    }
}
