//! Convergence studies over uniform refinements and rate fitting.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;

use crate::assembly::{space_and_system, SaddleSystem};
use crate::mesh::subdivide;
use crate::solver::{solve, SolveReport};
use crate::space::{Enrichment, FeSpace, FieldSolution};

use super::cases::ManufacturedCase;
use super::norms::{divergence_defect, error_norms, ErrorRecord};
use super::BenchError;

/// A solved case on one mesh.
pub struct LevelSolution {
    pub space: FeSpace,
    pub system: SaddleSystem,
    pub solution: FieldSolution,
    pub report: SolveReport,
}

/// Assembles and solves `case` on the `n x n` unit square mesh.
pub fn solve_case(case: &ManufacturedCase, n: usize) -> Result<LevelSolution, BenchError> {
    let subdiv = Arc::new(subdivide(&case.mesh(n)?)?);
    let coeffs = case.coefficients();
    let (space, system) = space_and_system(
        subdiv,
        case.mode,
        Enrichment::EdgeBubbles,
        &coeffs,
        case.model,
    )?;
    let report = solve(&system)?;
    let solution = system.field_solution(&space, &report.solution);
    Ok(LevelSolution {
        space,
        system,
        solution,
        report,
    })
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    /// Number of macro mesh vertices.
    pub nno: usize,
    /// `1 / sqrt(nno)`.
    pub h: f64,
    pub errors: ErrorRecord,
    pub divergence_defect: f64,
    pub relative_residual: f64,
    pub solve_time: Duration,
}

/// Least-squares slopes of `log(error)` against `log(h)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Slopes {
    pub l2_velocity: f64,
    pub h1_velocity: f64,
    pub l2_pressure: Option<f64>,
    pub projected_pressure: Option<f64>,
    pub divergence: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub case: &'static str,
    pub rows: Vec<ConvergenceRow>,
    /// Fitted over the last three levels.
    pub slopes: Slopes,
}

/// Number of finest levels used for the fitted rates.
pub const FIT_LEVELS: usize = 3;

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn slopes_of(rows: &[ConvergenceRow]) -> Slopes {
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let fit = |f: &dyn Fn(&ErrorRecord) -> f64| {
        fit_slope(&h, &rows.iter().map(|r| f(&r.errors)).collect::<Vec<_>>())
    };
    let has_pressure = rows.iter().all(|r| r.errors.l2_pressure.is_some());
    Slopes {
        l2_velocity: fit(&|e| e.l2_velocity),
        h1_velocity: fit(&|e| e.h1_velocity),
        l2_pressure: has_pressure.then(|| fit(&|e| e.l2_pressure.unwrap_or(f64::NAN))),
        projected_pressure: has_pressure
            .then(|| fit(&|e| e.projected_pressure.unwrap_or(f64::NAN))),
        divergence: fit(&|e| e.divergence),
        energy: fit(&|e| e.energy),
    }
}

/// Solves `case` on every level (in parallel) and fits the rates.
pub fn run_convergence(
    case: &ManufacturedCase,
    levels: &[usize],
) -> Result<ConvergenceRecord, BenchError> {
    run_convergence_with_finest(case, levels).map(|(record, _)| record)
}

/// [`run_convergence`] that also returns the solution on the finest level.
pub fn run_convergence_with_finest(
    case: &ManufacturedCase,
    levels: &[usize],
) -> Result<(ConvergenceRecord, LevelSolution), BenchError> {
    if levels.len() < FIT_LEVELS {
        return Err(BenchError::TooFewLevels(levels.len()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BenchError::InvalidParameter(format!(
            "levels must be strictly increasing, got {levels:?}"
        )));
    }
    let rows = levels
        .par_iter()
        .enumerate()
        .map(|(level, &n)| {
            let solved = solve_case(case, n)?;
            let errors = error_norms(&solved.space, &solved.solution, case);
            let nno = solved.space.mesh().num_vertices();
            log::info!("{} n={n}: {:?}", case.name, errors);
            let row = ConvergenceRow {
                level,
                n,
                nno,
                h: 1.0 / (nno as f64).sqrt(),
                errors,
                divergence_defect: divergence_defect(
                    &solved.space,
                    &solved.solution.velocity,
                    |x| (case.source)(x),
                ),
                relative_residual: solved.report.relative_residual,
                solve_time: solved.report.wall_time,
            };
            Ok((row, (level + 1 == levels.len()).then_some(solved)))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    let (rows, mut finest): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let finest = finest.pop().flatten().expect("the last level is kept");
    let slopes = slopes_of(&rows[rows.len() - FIT_LEVELS..]);
    Ok((
        ConvergenceRecord {
            case: case.name,
            rows,
            slopes,
        },
        finest,
    ))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl ConvergenceRecord {
    pub const CSV_HEADER: &'static str =
        "level,n,NNO,h,err_l2_u,err_h1_u,err_l2_p,err_p0p,err_div,\
                                          slope_l2_u,slope_h1_u,slope_l2_p,slope_p0p,slope_div";

    /// One row per level; the slope columns hold the rate against the
    /// previous level and are empty on the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let e = &r.errors;
            let cols = |e: &ErrorRecord| {
                [
                    Some(e.l2_velocity),
                    Some(e.h1_velocity),
                    e.l2_pressure,
                    e.projected_pressure,
                    Some(e.divergence),
                ]
            };
            let now = cols(e);
            let slopes: Vec<String> = match i.checked_sub(1).map(|j| &self.rows[j]) {
                Some(prev) => cols(&prev.errors)
                    .iter()
                    .zip(now)
                    .map(|(a, b)| cell(a.zip(b).map(|(a, b)| (a / b).ln() / (prev.h / r.h).ln())))
                    .collect(),
                None => vec![String::new(); 5],
            };
            let errs: Vec<String> = now.iter().map(|&v| cell(v)).collect();
            writeln!(
                out,
                "{},{},{},{:e},{},{}",
                r.level,
                r.n,
                r.nno,
                r.h,
                errs.join(","),
                slopes.join(",")
            )
            .unwrap();
        }
        out
    }
}
