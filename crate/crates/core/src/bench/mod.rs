//! Benchmark problems: manufactured solutions, error norms, convergence and
//! robustness studies, Cook's membrane and the coupled Stokes-Brinkman flows.

pub mod cases;
pub mod convergence;
pub mod cook;
pub mod coupling;
pub mod norms;

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::mesh::MeshError;
use crate::solver::SolverError;
use crate::space::SpaceError;

pub use cases::{
    case_brinkman, case_brinkman_darcy, case_darcy, case_elasticity, case_stokes, ManufacturedCase,
};
pub use convergence::{
    fit_slope, run_convergence, run_convergence_with_finest, solve_case, ConvergenceRecord,
    ConvergenceRow, LevelSolution, Slopes,
};
pub use cook::{
    case_cooks, locking_csv, plane_strain_lame, run_locking_study, solve_cooks, solve_cooks_on,
    CookElement, Lame, LockingRow,
};
pub use coupling::{
    run_brinkman_coupling, solve_coupling, solve_coupling_with, CouplingResult, Scenario,
};
pub use norms::{boundary_flux, divergence_defect, error_norms, ErrorRecord};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("a convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("{0}")]
    InvalidParameter(String),
}

/// Energy norm errors of `case(parameter)` on the `n x n` mesh for every
/// parameter value.
pub fn robustness_sweep(
    case: impl Fn(f64) -> ManufacturedCase + Sync,
    parameters: &[f64],
    n: usize,
) -> Result<Vec<(f64, ErrorRecord)>, BenchError> {
    use rayon::prelude::*;
    parameters
        .par_iter()
        .map(|&a| {
            let c = case(a);
            let s = solve_case(&c, n)?;
            Ok((a, error_norms(&s.space, &s.solution, &c)))
        })
        .collect()
}

/// `max / min - 1` over the values.
pub fn relative_spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    hi / lo - 1.0
}
