//! Builds Cook's membrane mesh, splits every macro triangle into six
//! subtriangles and round-trips the mesh through the text format.

use mce::mesh::{read_mesh, subdivide_with, validate_mesh, write_mesh, BoundarySplit, MacroMesh};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = MacroMesh::cook_membrane(4)?;
    println!(
        "{} vertices, {} triangles, {} edges, area {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.num_edges(),
        mesh.area()
    );
    for tag in mesh.tag_names() {
        let count = mesh
            .boundary_edges()
            .filter(|&e| mesh.edge_tag(e) == Some(tag.as_str()))
            .count();
        println!("  boundary `{tag}`: {count} edges");
    }
    assert!(validate_mesh(&mesh).is_empty());

    // slanted boundary edges fall back to the midpoint split
    let subdiv = subdivide_with(&mesh, BoundarySplit::PerpendicularOrMidpoint)?;
    let t = 0;
    println!("triangle {t}: centroid {:?}", subdiv.centroid(t));
    for e in mesh.triangle_edges(t) {
        println!(
            "  edge {e}: split node {:?}, direction {:?}",
            subdiv.split_point(e),
            subdiv.direction(e)
        );
    }
    for (s, [a, b, c]) in subdiv.subtriangles(t).iter().enumerate() {
        println!("  subtriangle {s}: {a:?} {b:?} {c:?}");
    }

    let text = write_mesh(&mesh);
    let back = read_mesh(text.as_bytes())?;
    assert_eq!(back, mesh);
    println!("mesh file: {} lines, round trip ok", text.lines().count());
    Ok(())
}
