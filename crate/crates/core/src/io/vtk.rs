//! Legacy ASCII VTK output on the subtriangulation.
//!
//! Points are the macro vertices, then the split node of every edge, then the
//! centroid of every macro triangle. Each macro triangle contributes its six
//! subtriangles as cells; the pressure is repeated over them.

use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::SUBTRIANGLE_NODES;
use crate::space::{FeSpace, FieldSolution};

use super::{write_text, IoError};

const VTK_TRIANGLE: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VtkSummary {
    pub points: usize,
    pub cells: usize,
}

/// Global point index of local node `node` of macro triangle `t`.
fn point_index(space: &FeSpace, t: usize, node: usize) -> usize {
    let mesh = space.mesh();
    match node {
        0..=2 => mesh.triangles()[t][node],
        3..=5 => mesh.num_vertices() + mesh.triangle_edges(t)[node - 3],
        _ => mesh.num_vertices() + mesh.num_edges() + t,
    }
}

pub fn vtk_string(space: &FeSpace, solution: &FieldSolution, title: &str) -> String {
    let sub = space.subdivision();
    let mesh = space.mesh();
    let (nv, ne, nt) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_triangles());
    let np = nv + ne + nt;
    let mut coords = vec![None; np];
    let mut velocity = vec![None; np];
    for t in 0..nt {
        let basis = space.basis(t);
        let c = basis.gather(&solution.velocity);
        for (node, x) in sub.local_nodes(t).into_iter().enumerate() {
            let i = point_index(space, t, node);
            if coords[i].is_none() {
                coords[i] = Some(x);
                velocity[i] = Some(basis.node_value(&c, node));
            }
        }
    }
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let mut out = format!("# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {np} double\n");
    for p in &coords {
        let p = p.unwrap_or_default();
        writeln!(out, "{:e} {:e} 0", p.x, p.y).unwrap();
    }
    let cells = 6 * nt;
    writeln!(out, "CELLS {cells} {}", 4 * cells).unwrap();
    for t in 0..nt {
        for s in SUBTRIANGLE_NODES {
            let [a, b, c] = s.map(|node| point_index(space, t, node));
            writeln!(out, "3 {a} {b} {c}").unwrap();
        }
    }
    writeln!(out, "CELL_TYPES {cells}").unwrap();
    for _ in 0..cells {
        writeln!(out, "{VTK_TRIANGLE}").unwrap();
    }
    writeln!(out, "POINT_DATA {np}\nVECTORS velocity double").unwrap();
    for v in &velocity {
        let v = v.unwrap_or_default();
        writeln!(out, "{:e} {:e} 0", v.x, v.y).unwrap();
    }
    writeln!(
        out,
        "CELL_DATA {cells}\nSCALARS pressure double 1\nLOOKUP_TABLE default"
    )
    .unwrap();
    for t in 0..nt {
        let p = solution.pressure.get(t).copied().unwrap_or(0.0);
        for _ in 0..6 {
            writeln!(out, "{p:e}").unwrap();
        }
    }
    out
}

/// Writes the velocity and pressure of `solution` to `path`.
pub fn write_vtk(
    space: &FeSpace,
    solution: &FieldSolution,
    path: &Path,
    title: &str,
) -> Result<VtkSummary, IoError> {
    write_text(path, &vtk_string(space, solution, title))?;
    let mesh = space.mesh();
    Ok(VtkSummary {
        points: mesh.num_vertices() + mesh.num_edges() + mesh.num_triangles(),
        cells: 6 * mesh.num_triangles(),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::boundary::{BoundaryCondition, BoundaryConditions};
    use crate::mesh::{subdivide, MacroMesh};
    use crate::space::{build_space, ConstraintMode, Enrichment};

    fn space(n: usize) -> FeSpace {
        let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(n).unwrap()).unwrap());
        let bcs = BoundaryConditions::everywhere(BoundaryCondition::free());
        build_space(
            subdiv,
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap()
    }

    #[test]
    fn one_square_has_twelve_cells() {
        let s = space(1);
        let sol = FieldSolution {
            velocity: vec![0.0; s.num_raw_velocity()],
            pressure: vec![1.0, 2.0],
        };
        let text = vtk_string(&s, &sol, "t");
        assert!(text.contains("CELLS 12 48"));
        // 4 vertices, 5 edges, 2 centroids
        assert!(text.contains("POINTS 11 double"));
        let pressures: Vec<&str> = text.lines().rev().take(12).collect();
        assert_eq!(pressures.iter().filter(|l| **l == "2e0").count(), 6);
    }

    #[test]
    fn constant_velocity_gives_equal_tuples() {
        let s = space(3);
        let mut velocity = vec![0.0; s.num_raw_velocity()];
        for v in 0..s.mesh().num_vertices() {
            velocity[2 * v] = 1.5;
            velocity[2 * v + 1] = -0.25;
        }
        let sol = FieldSolution {
            velocity,
            pressure: vec![0.0; s.mesh().num_triangles()],
        };
        let text = vtk_string(&s, &sol, "t");
        let start = text.lines().position(|l| l.starts_with("VECTORS")).unwrap();
        let np = s.mesh().num_vertices() + s.mesh().num_edges() + s.mesh().num_triangles();
        for line in text.lines().skip(start + 1).take(np) {
            let v: Vec<f64> = line.split(' ').map(|x| x.parse().unwrap()).collect();
            assert!(
                (v[0] - 1.5).abs() < 1e-14 && (v[1] + 0.25).abs() < 1e-14 && v[2] == 0.0,
                "{line}"
            );
        }
    }
}
