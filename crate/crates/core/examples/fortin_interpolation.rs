//! Fortin interpolation of a quartic field: the interpolant's divergence on
//! each macro triangle integrates to the exact flux through its boundary.

use std::sync::Arc;

use mce::boundary::{BoundaryCondition, BoundaryConditions};
use mce::geometry::Vec2;
use mce::mesh::{subdivide, MacroMesh};
use mce::quadrature::triangle_rule;
use mce::space::{build_space, ConstraintMode, Enrichment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = |p: Vec2| Vec2::new(p.x.powi(3) * p.y - p.y * p.y, p.x * p.x * p.y * p.y + p.x);
    let div_u = |p: Vec2| 3.0 * p.x * p.x * p.y + 2.0 * p.x * p.x * p.y;

    let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(4)?)?);
    let bcs = BoundaryConditions::everywhere(BoundaryCondition::free());
    let space = build_space(
        subdiv,
        ConstraintMode::Unconstrained,
        Enrichment::EdgeBubbles,
        &bcs,
    )?;
    let raw = space.fortin_interpolate(u)?;
    let rule = triangle_rule(6)?;
    let mesh = space.mesh();
    let mut worst: f64 = 0.0;
    for t in 0..mesh.num_triangles() {
        let d = space.macro_divergence(&raw, t);
        let exact = rule.integrate(mesh.triangle_points(t), div_u);
        worst = worst.max((d.value * mesh.triangle_area(t) - exact).abs());
        if t < 4 {
            println!(
                "triangle {t}: int div pi_h u = {:.12}, int div u = {exact:.12}, spread over subtriangles {:.1e}",
                d.value * mesh.triangle_area(t),
                d.max_deviation
            );
        }
    }
    println!(
        "largest mismatch over {} triangles: {worst:.1e}",
        mesh.num_triangles()
    );
    Ok(())
}
