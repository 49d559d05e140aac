//! The edge bubble on the reference triangle: nodal values, the common
//! divergence of the six subtriangles and the closed-form centroid value.

use mce::geometry::Vec2;
use mce::mesh::{subdivide, MacroMesh, NodeRole};
use mce::space::{closed_form_centroid_value, compute_bubble};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corners = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
    ];
    let mesh = MacroMesh::from_parts(corners, vec![[0, 1, 2]], &[], "wall")?;
    let subdiv = subdivide(&mesh)?;
    for e in 0..mesh.num_edges() {
        let bubble = compute_bubble(&subdiv, e)?;
        let side = &bubble.sides[0];
        println!(
            "edge {e} {:?}: direction {:?}",
            mesh.edge_points(e),
            bubble.direction
        );
        for (node, v) in side.node_values.iter().enumerate() {
            println!("  {:<10} {v:?}", NodeRole::of(node).name());
        }
        println!("  divergence on every subtriangle: {}", side.divergence);
        println!(
            "  centroid value {:?}, closed form {:?}",
            side.centroid_value,
            closed_form_centroid_value(&subdiv, side.triangle, side.local_edge)
        );
    }
    Ok(())
}
