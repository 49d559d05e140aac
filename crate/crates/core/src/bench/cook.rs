//! Cook's membrane in plane strain and the locking study.

use std::sync::Arc;

use rayon::prelude::*;

use crate::assembly::{assemble_elasticity_mixed, ProblemCoefficients};
use crate::boundary::{vector_field, zero_vector_field, BoundaryCondition, BoundaryConditions};
use crate::geometry::Vec2;
use crate::mesh::{subdivide_with, BoundarySplit, MacroMesh};
use crate::solver::solve;
use crate::space::{build_space, ConstraintMode, Enrichment, FeSpace, FieldSolution};

use super::BenchError;

pub const COOK_YOUNG: f64 = 200.0;
/// Traction density on the loaded edge `x = 48`.
pub const COOK_LOAD: Vec2 = Vec2::new(0.0, 1.0);
/// Vertex where the vertical tip displacement is read.
pub const COOK_TIP: Vec2 = Vec2::new(48.0, 60.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lame {
    pub mu: f64,
    pub lambda: f64,
}

/// Plane strain Lamé parameters from Young's modulus and Poisson's ratio.
pub fn plane_strain_lame(young: f64, nu: f64) -> Result<Lame, BenchError> {
    if !(nu > 0.0 && nu < 0.5) || !(young > 0.0) {
        return Err(BenchError::InvalidParameter(format!(
            "need E > 0 and 0 < nu < 0.5, got E = {young}, nu = {nu}"
        )));
    }
    Ok(Lame {
        mu: young / (2.0 * (1.0 + nu)),
        lambda: young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
    })
}

/// Element used for the displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CookElement {
    /// Affine vertex functions with edge bubbles.
    Compatible,
    /// Plain continuous affine functions on the macro triangles.
    PlainAffine,
}

impl CookElement {
    fn enrichment(self) -> Enrichment {
        match self {
            CookElement::Compatible => Enrichment::EdgeBubbles,
            CookElement::PlainAffine => Enrichment::None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CookElement::Compatible => "compatible",
            CookElement::PlainAffine => "affine",
        }
    }
}

/// Coefficients and boundary data for Poisson ratio `nu`: clamped at `x = 0`,
/// traction free on top and bottom, shear load on `x = 48`.
pub fn case_cooks(nu: f64) -> Result<ProblemCoefficients, BenchError> {
    let lame = plane_strain_lame(COOK_YOUNG, nu)?;
    let bcs = BoundaryConditions::new()
        .on("clamped", BoundaryCondition::no_slip())
        .on("traction-free", BoundaryCondition::free())
        .on(
            "loaded",
            BoundaryCondition::Traction(vector_field(|_| COOK_LOAD)),
        );
    Ok(ProblemCoefficients::elasticity(
        lame.mu,
        lame.lambda,
        zero_vector_field(),
        bcs,
    ))
}

pub struct CookSolution {
    pub space: FeSpace,
    pub solution: FieldSolution,
    /// Vertical displacement at (48, 60).
    pub tip: f64,
    pub relative_residual: f64,
    pub rounding_floor: f64,
}

/// Solves Cook's membrane on the `n x n` mesh.
pub fn solve_cooks(nu: f64, n: usize, element: CookElement) -> Result<CookSolution, BenchError> {
    solve_cooks_on(&MacroMesh::cook_membrane(n)?, nu, element)
}

/// Solves the membrane problem on `mesh`, which must carry the boundary tags
/// `clamped`, `traction-free` and `loaded`. The tip is the vertex nearest to
/// (48, 60).
pub fn solve_cooks_on(
    mesh: &MacroMesh,
    nu: f64,
    element: CookElement,
) -> Result<CookSolution, BenchError> {
    let coeffs = case_cooks(nu)?;
    // the perpendicular foot leaves the slanted boundary edges of this mesh
    let subdiv = Arc::new(subdivide_with(
        mesh,
        BoundarySplit::PerpendicularOrMidpoint,
    )?);
    let space = build_space(
        subdiv,
        ConstraintMode::FullDirichlet,
        element.enrichment(),
        &coeffs.boundary,
    )?;
    // near the incompressible limit the primal system is too badly scaled
    // for a residual below the solver tolerance
    let system = assemble_elasticity_mixed(&space, &coeffs)?;
    let report = solve(&system)?;
    let solution = system.field_solution(&space, &report.solution);
    let v = space.mesh().nearest_vertex(COOK_TIP);
    let tip = solution.vertex_velocity(v).y;
    Ok(CookSolution {
        space,
        solution,
        tip,
        relative_residual: report.relative_residual,
        rounding_floor: report.rounding_floor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LockingRow {
    pub nu: f64,
    pub n: usize,
    pub compatible_tip: f64,
    pub affine_tip: f64,
}

/// Tip displacements of both elements for every `(nu, n)` pair.
pub fn run_locking_study(nus: &[f64], levels: &[usize]) -> Result<Vec<LockingRow>, BenchError> {
    let pairs: Vec<(f64, usize)> = nus
        .iter()
        .flat_map(|&nu| levels.iter().map(move |&n| (nu, n)))
        .collect();
    pairs
        .par_iter()
        .map(|&(nu, n)| {
            Ok(LockingRow {
                nu,
                n,
                compatible_tip: solve_cooks(nu, n, CookElement::Compatible)?.tip,
                affine_tip: solve_cooks(nu, n, CookElement::PlainAffine)?.tip,
            })
        })
        .collect()
}

pub const LOCKING_CSV_HEADER: &str = "nu,n,element,tip_displacement";

/// Two rows per `(nu, n)`, one per element.
pub fn locking_csv(rows: &[LockingRow]) -> String {
    let mut out = format!("{LOCKING_CSV_HEADER}\n");
    for r in rows {
        for (element, tip) in [
            (CookElement::Compatible, r.compatible_tip),
            (CookElement::PlainAffine, r.affine_tip),
        ] {
            out.push_str(&format!(
                "{:e},{},{},{:e}\n",
                r.nu,
                r.n,
                element.name(),
                tip
            ));
        }
    }
    out
}
