//! Assembling and solving a problem from scratch: Brinkman flow with a
//! source term, no slip walls and a spatially varying viscosity.

use std::sync::Arc;

use mce::assembly::{assemble, Coefficient, Model, ProblemCoefficients};
use mce::bench::divergence_defect;
use mce::boundary::{scalar_field, vector_field, BoundaryCondition, BoundaryConditions};
use mce::geometry::Vec2;
use mce::io::vtk_string;
use mce::mesh::{subdivide, MacroMesh};
use mce::solver::solve;
use mce::space::{build_space, ConstraintMode, Enrichment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = MacroMesh::unit_square(12)?;
    let mu = Coefficient::by_centroid(&mesh, |p| if p.x < 0.5 { 1.0 } else { 0.01 });
    let source = |p: Vec2| (std::f64::consts::PI * p.x).cos() * p.y;
    let coeffs = ProblemCoefficients::brinkman(
        mu,
        1.0,
        vector_field(|p| Vec2::new(0.0, 10.0 * p.x)),
        scalar_field(source),
        BoundaryConditions::everywhere(BoundaryCondition::no_slip()),
    );
    let space = build_space(
        Arc::new(subdivide(&mesh)?),
        ConstraintMode::FullDirichlet,
        Enrichment::EdgeBubbles,
        &coeffs.boundary,
    )?;
    let system = assemble(&space, &coeffs, Model::Brinkman)?;
    println!(
        "{} unknowns ({} velocity, {} pressure), {} nonzeros",
        system.layout.total(),
        system.layout.velocity,
        space.num_pressure(),
        system.matrix.nnz()
    );
    let report = solve(&system)?;
    println!(
        "relative residual {:.1e}, condition estimate {:.1e}, {:.3} s",
        report.relative_residual,
        report.condition_estimate,
        report.wall_time.as_secs_f64()
    );
    let u = system.field_solution(&space, &report.solution);
    println!(
        "max |div u_h - pi0 g| (scaled): {:.1e}",
        divergence_defect(&space, &u.velocity, source)
    );
    let vtk = vtk_string(&space, &u, "custom brinkman");
    println!("VTK output: {} lines", vtk.lines().count());
    Ok(())
}
