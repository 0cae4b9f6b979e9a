//! Empirical constants of the inequality harnesses over grids of (n, d, p).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeprod::{FreeFactor, Measure, NcPoly};
use crate::ineq::random::{instance_seed, random_poly, random_q_poly, rng};
use crate::ineq::{
    format_float, khintchine_report, random_reduction_items, reduction_report, rosenthal_report,
    sigma1_bound, FreeNorms, InequalityReport,
};
use crate::normcalc::PIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rosenthal,
    Khintchine,
    Reduction,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rosenthal => "rosenthal",
            Family::Khintchine => "khintchine",
            Family::Reduction => "reduction",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rosenthal" => Ok(Family::Rosenthal),
            "khintchine" => Ok(Family::Khintchine),
            "reduction" => Ok(Family::Reduction),
            other => Err(Error::Parse(format!("unknown sweep family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: usize,
    pub d: usize,
    pub p: PIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub p: PIndex,
    pub trials: usize,
    pub ratio_median: f64,
    pub ratio_max: f64,
    pub certified_frac: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub reports: Vec<InequalityReport>,
    pub summary: Vec<SweepSummary>,
    /// One line per skipped cell.
    pub notes: Vec<String>,
}

/// Reference scale for the empirical constant at degree d; sweeps assert ratios stay within
/// ten times this value.
pub fn reference_envelope(d: usize) -> f64 {
    sigma1_bound(d.max(1))
}

/// Coefficient size and terms per polynomial of every sweep instance.
const COEFF_DIM: usize = 2;
const TERMS: usize = 3;

/// Factors 0..n alternating between a free Bernoulli and a three-node semicircular quadrature.
pub fn standard_factors(n: usize) -> Result<Vec<FreeFactor>> {
    (0..n)
        .map(|k| {
            if k % 2 == 0 {
                Ok(FreeFactor::bernoulli())
            } else {
                FreeFactor::quadrature(Measure::Wigner, 3)
            }
        })
        .collect()
}

/// The worse of the two directions: max(lhs/rhs, rhs/lhs).
pub fn equivalence_constant(r: &InequalityReport) -> f64 {
    r.ratio_lo.max(r.ratio_hi)
}

fn run_trial(family: Family, cell: GridCell, seed: u64, depth: usize) -> Result<InequalityReport> {
    let f = standard_factors(cell.n)?;
    let engine = FreeNorms::new(f.clone(), depth);
    let mut g = rng(seed);
    let mut r = match family {
        Family::Rosenthal => {
            let a: Vec<NcPoly> = (0..cell.n)
                .map(|k| random_q_poly(&mut g, &f, k, COEFF_DIM, cell.d, TERMS))
                .collect::<Result<_>>()?;
            rosenthal_report(&engine, &a, cell.p)?
        }
        Family::Khintchine => {
            let x = random_poly(&mut g, &f, COEFF_DIM, cell.d, TERMS)?;
            khintchine_report(&engine, &x, cell.p)?
        }
        Family::Reduction => {
            let items = random_reduction_items(&mut g, &f, COEFF_DIM, cell.d, TERMS, 2)?;
            reduction_report(&engine, &items, cell.p)?
        }
    };
    r.set_param("seed", seed);
    r.set_param("family", family.to_string());
    Ok(r)
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn validate_cell(family: Family, cell: &GridCell) -> Result<()> {
    if cell.n == 0 {
        return Err(Error::validation("n must be positive"));
    }
    if cell.d > 3 {
        return Err(Error::validation("degree above 3 is out of desk scale"));
    }
    if cell.d > 1 && cell.n < 2 {
        return Err(Error::validation("degree above 1 needs two factors"));
    }
    if family == Family::Reduction && cell.n < 2 && cell.d > 0 {
        return Err(Error::validation(
            "reduction with positive degree needs two factors",
        ));
    }
    if !cell.p.is_infinite() && cell.p.even().is_none() {
        return Err(Error::validation(format!(
            "p must be even or inf, got {}",
            cell.p
        )));
    }
    Ok(())
}

/// Runs `trials` seeded instances per cell in parallel. Cells whose instances exceed the
/// capacity are skipped with a note; other errors abort.
pub fn constant_growth_sweep(
    family: Family,
    grid: &[GridCell],
    trials: usize,
    seed: u64,
    depth: usize,
) -> Result<SweepOutput> {
    for c in grid {
        validate_cell(family, c)?;
    }
    let cells: Vec<Result<std::result::Result<(Vec<InequalityReport>, SweepSummary), String>>> =
        grid.par_iter()
            .enumerate()
            .map(|(ci, &cell)| {
                let cell_seed = instance_seed(seed, ci as u64);
                let mut reports = Vec::with_capacity(trials);
                for t in 0..trials {
                    match run_trial(family, cell, instance_seed(cell_seed, t as u64), depth) {
                        Ok(r) => reports.push(r),
                        Err(e) if e.is_capacity() => {
                            return Ok(Err(format!(
                                "{family} n={} d={} p={} skipped: {e}",
                                cell.n, cell.d, cell.p
                            )))
                        }
                        Err(e) => return Err(e),
                    }
                }
                let mut ratios: Vec<f64> = reports.iter().map(equivalence_constant).collect();
                let ratio_max = ratios.iter().cloned().fold(0.0, f64::max);
                let certified = reports.iter().filter(|r| r.certified).count();
                let summary = SweepSummary {
                    family,
                    n: cell.n,
                    d: cell.d,
                    p: cell.p,
                    trials: reports.len(),
                    ratio_median: median(&mut ratios),
                    ratio_max,
                    certified_frac: if reports.is_empty() {
                        0.0
                    } else {
                        certified as f64 / reports.len() as f64
                    },
                };
                Ok(Ok((reports, summary)))
            })
            .collect();
    let mut out = SweepOutput::default();
    for c in cells {
        match c? {
            Ok((reports, summary)) => {
                out.reports.extend(reports);
                out.summary.push(summary);
            }
            Err(note) => out.notes.push(note),
        }
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str = "family,n,d,p,trials,ratio_median,ratio_max,certified_frac";

pub fn summary_to_csv(rows: &[SweepSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER.split(','))
        .map_err(|e| Error::Io(e.to_string()))?;
    for s in rows {
        w.write_record([
            s.family.to_string(),
            s.n.to_string(),
            s.d.to_string(),
            s.p.to_string(),
            s.trials.to_string(),
            format_float(s.ratio_median),
            format_float(s.ratio_max),
            format_float(s.certified_frac),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// The grid n × d × p in row-major order.
pub fn product_grid(ns: &[usize], ds: &[usize], ps: &[PIndex]) -> Vec<GridCell> {
    let mut out = Vec::new();
    for &n in ns {
        for &d in ds {
            for &p in ps {
                out.push(GridCell { n, d, p });
            }
        }
    }
    out
}
