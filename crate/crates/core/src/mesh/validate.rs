use std::fmt;

use super::MacroMesh;
use crate::geometry::Vec2;

/// A violated mesh invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshIssue {
    NonFiniteVertex { vertex: usize },
    UnusedVertex { vertex: usize },
    NegativeArea { triangle: usize },
    ZeroArea { triangle: usize },
    DegenerateEdge { edge: usize, vertices: [usize; 2] },
    HangingVertex { vertex: usize, edge: usize },
}

impl fmt::Display for MeshIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshIssue::NonFiniteVertex { vertex } => {
                write!(f, "non-finite coordinates at vertex {vertex}")
            }
            MeshIssue::UnusedVertex { vertex } => {
                write!(f, "vertex {vertex} is not used by any triangle")
            }
            MeshIssue::NegativeArea { triangle } => {
                write!(f, "negative area at triangle {triangle}")
            }
            MeshIssue::ZeroArea { triangle } => write!(f, "zero area at triangle {triangle}"),
            MeshIssue::DegenerateEdge { edge, vertices } => {
                write!(
                    f,
                    "degenerate edge {edge} between vertices {} and {}",
                    vertices[0], vertices[1]
                )
            }
            MeshIssue::HangingVertex { vertex, edge } => {
                write!(f, "hanging vertex {vertex} inside edge {edge}")
            }
        }
    }
}

/// Lists every violated invariant; an empty list means the mesh is valid.
pub fn validate_mesh(mesh: &MacroMesh) -> Vec<MeshIssue> {
    let mut issues = Vec::new();
    let scale = mesh
        .vertices()
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.max_abs()))
        .max(f64::MIN_POSITIVE);

    let mut used = vec![false; mesh.num_vertices()];
    for tri in mesh.triangles() {
        for &v in tri {
            used[v] = true;
        }
    }
    for (v, p) in mesh.vertices().iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            issues.push(MeshIssue::NonFiniteVertex { vertex: v });
        }
        if !used[v] {
            issues.push(MeshIssue::UnusedVertex { vertex: v });
        }
    }

    for t in 0..mesh.num_triangles() {
        let area = mesh.triangle_area(t);
        if area < 0.0 {
            issues.push(MeshIssue::NegativeArea { triangle: t });
        } else if area <= 1e-14 * scale * scale {
            issues.push(MeshIssue::ZeroArea { triangle: t });
        }
    }

    for (e, edge) in mesh.edges().iter().enumerate() {
        if mesh.edge_length(e) <= 1e-14 * scale {
            issues.push(MeshIssue::DegenerateEdge {
                edge: e,
                vertices: edge.vertices,
            });
        }
    }

    // A hanging vertex leaves unmatched edges on both sides of it, so only
    // edges with a single incident triangle need to be scanned.
    for e in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(e);
        let len = a.distance(b);
        if len <= 1e-14 * scale {
            continue;
        }
        for (v, &p) in mesh.vertices().iter().enumerate() {
            if mesh.edges()[e].vertices.contains(&v) {
                continue;
            }
            if on_open_segment(p, a, b, 1e-10 * len) {
                issues.push(MeshIssue::HangingVertex { vertex: v, edge: e });
            }
        }
    }
    issues
}

fn on_open_segment(p: Vec2, a: Vec2, b: Vec2, tol: f64) -> bool {
    let d = b - a;
    let len = d.norm();
    let along = (p - a).dot(d) / len;
    let off = (p - a).cross(d).abs() / len;
    off <= tol && along > tol && along < len - tol
}
