//! Two-level split of every macro triangle.
//!
//! Joining the centroid to the three corners gives three children; each child
//! is then cut by the line from the centroid to the split node of its outer
//! edge, giving six subtriangles. On interior edges the split node is where
//! the segment between the two incident centroids crosses the edge, so the
//! subtriangulation is conforming across macro edges. On boundary edges it is
//! the foot of the perpendicular from the centroid; [`BoundarySplit`] allows
//! falling back to the edge midpoint where that foot lands too close to (or
//! beyond) an edge end, as on strongly sheared boundary cells.
//!
//! Local node numbering on a macro triangle: `0..3` are the corners, `3 + k`
//! is the split node of local edge `k` (corners `k`, `k + 1`), `6` is the
//! centroid.

use std::sync::Arc;

use super::{validate_mesh, MacroMesh, MeshError};
use crate::geometry::Vec2;

/// Local node triples of the six subtriangles, all counter-clockwise.
/// Subtriangles `2k` and `2k + 1` are the two halves of the child on edge `k`.
pub const SUBTRIANGLE_NODES: [[usize; 3]; 6] = [
    [0, 3, 6],
    [3, 1, 6],
    [1, 4, 6],
    [4, 2, 6],
    [2, 5, 6],
    [5, 0, 6],
];

/// Role of a local node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    MacroVertex(usize),
    EdgeNode(usize),
    Centroid,
}

impl NodeRole {
    pub fn of(local: usize) -> NodeRole {
        match local {
            0..=2 => NodeRole::MacroVertex(local),
            3..=5 => NodeRole::EdgeNode(local - 3),
            6 => NodeRole::Centroid,
            _ => panic!("local node {local} out of range"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeRole::MacroVertex(_) => "macro-vertex",
            NodeRole::EdgeNode(_) => "edge-node",
            NodeRole::Centroid => "centroid",
        }
    }
}

/// Relative distance from an edge endpoint below which a split node is rejected.
const SPLIT_TOLERANCE: f64 = 1e-10;

/// How split nodes on boundary edges are placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundarySplit {
    /// Foot of the perpendicular from the centroid; fails if it leaves the edge.
    #[default]
    Perpendicular,
    /// Perpendicular foot when it lies in the middle 80% of the edge,
    /// otherwise the midpoint (where the median through the centroid meets
    /// the edge).
    PerpendicularOrMidpoint,
}

/// Edge parameter range in which the fallback policy keeps the perpendicular foot.
const FOOT_MARGIN: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct SubdividedMesh {
    mesh: Arc<MacroMesh>,
    centroids: Vec<Vec2>,
    split_points: Vec<Vec2>,
    directions: Vec<Vec2>,
}

impl SubdividedMesh {
    pub fn mesh(&self) -> &MacroMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<MacroMesh> {
        &self.mesh
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        self.centroids[t]
    }

    /// Split node of edge `e`.
    pub fn split_point(&self, e: usize) -> Vec2 {
        self.split_points[e]
    }

    /// Unit direction of the split line of edge `e`, pointing from the centroid
    /// of the lower-indexed incident triangle toward the split node.
    pub fn direction(&self, e: usize) -> Vec2 {
        self.directions[e]
    }

    /// The seven local nodes of macro triangle `t`.
    pub fn local_nodes(&self, t: usize) -> [Vec2; 7] {
        let [a, b, c] = self.mesh.triangle_points(t);
        let [e0, e1, e2] = self.mesh.triangle_edges(t);
        [
            a,
            b,
            c,
            self.split_points[e0],
            self.split_points[e1],
            self.split_points[e2],
            self.centroids[t],
        ]
    }

    /// Corner points of the six subtriangles of macro triangle `t`.
    pub fn subtriangles(&self, t: usize) -> [[Vec2; 3]; 6] {
        let nodes = self.local_nodes(t);
        SUBTRIANGLE_NODES.map(|s| s.map(|i| nodes[i]))
    }
}

/// Computes centroids, split nodes and split directions.
///
/// Fails on invalid meshes and when a split node would fall outside (or
/// within a relative `1e-10` of the ends of) its edge.
pub fn subdivide(mesh: &MacroMesh) -> Result<SubdividedMesh, MeshError> {
    subdivide_with(mesh, BoundarySplit::Perpendicular)
}

pub fn subdivide_with(
    mesh: &MacroMesh,
    policy: BoundarySplit,
) -> Result<SubdividedMesh, MeshError> {
    let issues = validate_mesh(mesh);
    if !issues.is_empty() {
        return Err(MeshError::Invalid(issues));
    }
    let centroids: Vec<Vec2> = (0..mesh.num_triangles())
        .map(|t| {
            let [a, b, c] = mesh.triangle_points(t);
            (a + b + c) / 3.0
        })
        .collect();

    let mut split_points = Vec::with_capacity(mesh.num_edges());
    let mut directions = Vec::with_capacity(mesh.num_edges());
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = mesh.edge_points(e);
        let along = b - a;
        let c0 = centroids[edge.triangles.0];
        let r = match edge.triangles.1 {
            Some(t1) => {
                let d = centroids[t1] - c0;
                let w = a - c0;
                let denom = d.cross(along);
                if denom.abs() <= f64::EPSILON * d.norm() * along.norm() {
                    return Err(MeshError::SplitOutsideEdge {
                        edge: e,
                        reason: "centroid segment parallel to edge",
                    });
                }
                let s = w.cross(along) / denom;
                if !(0.0..=1.0).contains(&s) {
                    return Err(MeshError::SplitOutsideEdge {
                        edge: e,
                        reason: "edge line crossed outside the centroid segment",
                    });
                }
                w.cross(d) / denom
            }
            None => {
                let foot = (c0 - a).dot(along) / along.dot(along);
                let inside = (FOOT_MARGIN..=1.0 - FOOT_MARGIN).contains(&foot);
                if policy == BoundarySplit::PerpendicularOrMidpoint && !inside {
                    0.5
                } else {
                    foot
                }
            }
        };
        if !(r > SPLIT_TOLERANCE && r < 1.0 - SPLIT_TOLERANCE) {
            return Err(MeshError::SplitOutsideEdge {
                edge: e,
                reason: if edge.is_boundary() {
                    "perpendicular foot outside the boundary edge"
                } else {
                    "centroid segment misses the shared edge"
                },
            });
        }
        let xm = a + along * r;
        split_points.push(xm);
        directions.push((xm - c0).normalized());
    }

    Ok(SubdividedMesh {
        mesh: Arc::new(mesh.clone()),
        centroids,
        split_points,
        directions,
    })
}
