//! Coupled Stokes-Brinkman flows on (0,2)^2 driven by `f = (0, 100)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::assembly::{space_and_system, Coefficient, Model, ProblemCoefficients, DEFAULT_GAMMA};
use crate::boundary::{vector_field, zero_scalar_field, BoundaryCondition, BoundaryConditions};
use crate::geometry::Vec2;
use crate::mesh::{subdivide, MacroMesh};
use crate::solver::solve;
use crate::space::{ConstraintMode, Enrichment, FeSpace, FieldSolution};

use super::norms::{boundary_flux, divergence_defect};
use super::BenchError;

pub const COUPLING_FORCE: Vec2 = Vec2::new(0.0, 100.0);
/// Grid size used by the test suite.
pub const CI_GRID_NODES: usize = 40;
/// Grid size of the reference computations.
pub const FULL_GRID_NODES: usize = 80;
pub const NORMAL_MU: [f64; 4] = [1.0, 1e-2, 1e-3, 1e-6];
pub const TANGENTIAL_MU: [f64; 4] = [10.0, 1.0, 1e-1, 1e-2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Stokes below `y = 1`, porous above; walls at `x = 0` and `x = 2`.
    Normal,
    /// Porous for `x <= 1`, Stokes beyond; slip wall at `x = 0`, no slip at `x = 2`.
    Tangential,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Normal => "normal",
            Scenario::Tangential => "tangential",
        }
    }

    /// Viscosity and permeability coefficient at `x`, with `mu` the value
    /// swept in the porous part.
    pub fn coefficients_at(self, mu: f64, x: Vec2) -> (f64, f64) {
        match self {
            Scenario::Normal if x.y <= 1.0 => (1.0, 0.0),
            Scenario::Normal => (mu, 1.0),
            Scenario::Tangential if x.x > 1.0 => (100.0, 0.0),
            Scenario::Tangential => (mu, 1e3),
        }
    }
}

/// Mesh of `nodes x nodes` vertices on (0,2)^2 and the problem data. The
/// coefficients are sampled at the triangle centroids. The top and bottom
/// sides are traction free.
pub fn coupling_problem(
    scenario: Scenario,
    mu: f64,
    nodes: usize,
) -> Result<(MacroMesh, ProblemCoefficients), BenchError> {
    if nodes < 2 {
        return Err(BenchError::InvalidParameter(format!(
            "grid needs at least 2 nodes per side, got {nodes}"
        )));
    }
    if !(mu > 0.0) {
        return Err(BenchError::InvalidParameter(format!(
            "viscosity must be positive, got {mu}"
        )));
    }
    let mesh = MacroMesh::rectangle(nodes - 1, Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0))?;
    let mu_t = Coefficient::by_centroid(&mesh, |x| scenario.coefficients_at(mu, x).0);
    let sigma_t = Coefficient::by_centroid(&mesh, |x| scenario.coefficients_at(mu, x).1);
    let side = match scenario {
        Scenario::Normal => BoundaryCondition::no_slip(),
        Scenario::Tangential => BoundaryCondition::no_penetration(),
    };
    let bcs = BoundaryConditions::new()
        .on("left", side)
        .on("right", BoundaryCondition::no_slip())
        .otherwise(BoundaryCondition::free());
    let coeffs = ProblemCoefficients::brinkman(
        mu_t,
        sigma_t,
        vector_field(|_| COUPLING_FORCE),
        zero_scalar_field(),
        bcs,
    );
    Ok((mesh, coeffs))
}

pub struct CouplingResult {
    pub scenario: Scenario,
    pub mu: f64,
    pub space: FeSpace,
    pub solution: FieldSolution,
    pub divergence_defect: f64,
    /// Net outward flux and the sum of absolute boundary edge fluxes.
    pub net_outflow: f64,
    pub total_flux: f64,
    /// `(x, u)` along `y = 1`.
    pub profile: Vec<(f64, Vec2)>,
}

pub fn solve_coupling(
    scenario: Scenario,
    mu: f64,
    nodes: usize,
) -> Result<CouplingResult, BenchError> {
    solve_coupling_with(
        scenario,
        mu,
        nodes,
        ConstraintMode::FullDirichlet,
        DEFAULT_GAMMA,
    )
}

/// [`solve_coupling`] with the wall conditions imposed according to `mode`
/// and Nitsche penalty `gamma`.
pub fn solve_coupling_with(
    scenario: Scenario,
    mu: f64,
    nodes: usize,
    mode: ConstraintMode,
    gamma: f64,
) -> Result<CouplingResult, BenchError> {
    let (mesh, coeffs) = coupling_problem(scenario, mu, nodes)?;
    let subdiv = Arc::new(subdivide(&mesh)?);
    let coeffs = coeffs.with_gamma(gamma);
    let (space, system) = space_and_system(
        subdiv,
        mode,
        Enrichment::EdgeBubbles,
        &coeffs,
        Model::Brinkman,
    )?;
    let report = solve(&system)?;
    let solution = system.field_solution(&space, &report.solution);
    let defect = divergence_defect(&space, &solution.velocity, |_| 0.0);
    let (net_outflow, total_flux) = boundary_flux(&space, &solution.velocity);
    let profile = profile_at(&space, &solution.velocity, 1.0, nodes - 1)?;
    Ok(CouplingResult {
        scenario,
        mu,
        space,
        solution,
        divergence_defect: defect,
        net_outflow,
        total_flux,
        profile,
    })
}

/// Velocity at the `cells` cell midpoints `x = (i + 1/2) 2 / cells` on the line `y`.
pub fn profile_at(
    space: &FeSpace,
    velocity: &[f64],
    y: f64,
    cells: usize,
) -> Result<Vec<(f64, Vec2)>, BenchError> {
    let mesh = space.mesh();
    (0..cells)
        .map(|i| {
            let p = Vec2::new((i as f64 + 0.5) * 2.0 / cells as f64, y);
            let t = mesh.locate(p, 1e-12).ok_or_else(|| {
                BenchError::InvalidParameter(format!(
                    "profile point ({}, {y}) outside the mesh",
                    p.x
                ))
            })?;
            Ok((p.x, space.eval_velocity(velocity, t, p)?))
        })
        .collect()
}

/// Half width of the window around `x = 1` in which oscillations are counted.
pub const OSCILLATION_WINDOW: f64 = 0.25;
/// Second differences below this fraction of the largest one are treated as zero.
pub const OSCILLATION_THRESHOLD: f64 = 1e-2;

/// Sign changes of the second difference of `values` over the samples with
/// `|x - center| <= window`, ignoring second differences below the threshold.
pub fn oscillation_count(profile: &[(f64, f64)], center: f64, window: f64) -> usize {
    let d2: Vec<(f64, f64)> = profile
        .windows(3)
        .map(|w| (w[1].0, w[0].1 - 2.0 * w[1].1 + w[2].1))
        .filter(|(x, _)| (x - center).abs() <= window)
        .collect();
    let largest = d2.iter().fold(0.0_f64, |m, &(_, d)| m.max(d.abs()));
    let signs: Vec<f64> = d2
        .iter()
        .filter(|&&(_, d)| d.abs() > OSCILLATION_THRESHOLD * largest)
        .map(|&(_, d)| d.signum())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

impl CouplingResult {
    /// Oscillations of the vertical velocity along `y = 1` near the interface.
    pub fn interface_oscillations(&self) -> usize {
        let p: Vec<(f64, f64)> = self.profile.iter().map(|&(x, u)| (x, u.y)).collect();
        oscillation_count(&p, 1.0, OSCILLATION_WINDOW)
    }

    pub fn profile_csv(&self) -> String {
        let mut out = String::from("x,u_x,u_y\n");
        for (x, u) in &self.profile {
            out.push_str(&format!("{x:e},{:e},{:e}\n", u.x, u.y));
        }
        out
    }
}

/// Solves `scenario` for every viscosity; results follow the order of `mus`.
pub fn run_brinkman_coupling(
    scenario: Scenario,
    mus: &[f64],
    nodes: usize,
) -> Result<Vec<CouplingResult>, BenchError> {
    mus.par_iter()
        .map(|&mu| solve_coupling(scenario, mu, nodes))
        .collect()
}
