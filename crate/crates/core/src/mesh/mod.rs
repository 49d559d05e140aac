//! Macro triangulations: connectivity, boundary tags, generators, text I/O,
//! validation and the two-level subdivision that carries the enriched space.

mod format;
mod subdivide;
mod validate;

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{signed_area, Vec2};

pub use format::{read_mesh, write_mesh};
pub use subdivide::{
    subdivide, subdivide_with, BoundarySplit, NodeRole, SubdividedMesh, SUBTRIANGLE_NODES,
};
pub use validate::{validate_mesh, MeshIssue};

/// Tag given to boundary edges that a mesh file does not list.
pub const DEFAULT_BOUNDARY_TAG: &str = "wall";

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh resolution must be at least 1, got {0}")]
    InvalidResolution(usize),
    #[error("triangle {triangle} references vertex {index}, but the mesh has {count} vertices")]
    VertexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("boundary entry ({0}, {1}) is not a boundary edge of the mesh")]
    NotABoundaryEdge(usize, usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<MeshIssue>),
    #[error("edge {edge}: split point leaves the open edge ({reason})")]
    SplitOutsideEdge { edge: usize, reason: &'static str },
}

/// An edge of the macro triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub vertices: [usize; 2],
    /// Incident triangles in increasing index order; the second is absent
    /// on the boundary.
    pub triangles: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles.1.is_none()
    }
}

/// A conforming triangulation whose triangles carry one pressure unknown each.
#[derive(Clone, Debug)]
pub struct MacroMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    edge_tags: Vec<Option<usize>>,
    tag_names: Vec<String>,
}

impl PartialEq for MacroMesh {
    /// Same geometry, connectivity and per-edge tag names; the internal order
    /// of the tag table is irrelevant.
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.triangles == other.triangles
            && self.edges == other.edges
            && (0..self.edges.len()).all(|e| self.edge_tag(e) == other.edge_tag(e))
    }
}

impl MacroMesh {
    /// Builds connectivity for the given vertices and triangles.
    ///
    /// `boundary` assigns tags to boundary edges given by their endpoints;
    /// remaining boundary edges receive `default_tag`. Geometry (orientation,
    /// degeneracy) is not checked here; see [`validate_mesh`].
    pub fn from_parts(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary: &[([usize; 2], String)],
        default_tag: &str,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= nv) {
                return Err(MeshError::VertexOutOfRange {
                    triangle: t,
                    index,
                    count: nv,
                });
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = match lookup.get(&key) {
                    Some(&id) => {
                        let edge = &mut edges[id];
                        if edge.triangles.1.is_some() {
                            return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                        }
                        edge.triangles.1 = Some(t);
                        id
                    }
                    None => {
                        edges.push(Edge {
                            vertices: key,
                            triangles: (t, None),
                        });
                        lookup.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                local[k] = id;
            }
            triangle_edges.push(local);
        }

        let mut tag_names: Vec<String> = Vec::new();
        let tag_id = |name: &str, names: &mut Vec<String>| -> usize {
            match names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            }
        };
        let mut edge_tags = vec![None; edges.len()];
        for ([a, b], tag) in boundary {
            let key = [*a.min(b), *a.max(b)];
            match lookup.get(&key) {
                Some(&id) if edges[id].is_boundary() => {
                    edge_tags[id] = Some(tag_id(tag, &mut tag_names));
                }
                _ => return Err(MeshError::NotABoundaryEdge(*a, *b)),
            }
        }
        for (id, edge) in edges.iter().enumerate() {
            if edge.is_boundary() && edge_tags[id].is_none() {
                edge_tags[id] = Some(tag_id(default_tag, &mut tag_names));
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            edge_tags,
            tag_names,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids of triangle `t`; local edge `k` joins local vertices `k` and `k + 1`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn edge_points(&self, e: usize) -> [Vec2; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        a.distance(b)
    }

    /// Local index (0..3) of edge `e` within triangle `t`.
    pub fn local_edge_index(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    /// Boundary tag of edge `e`, or `None` for interior edges.
    pub fn edge_tag(&self, e: usize) -> Option<&str> {
        self.edge_tags[e].map(|i| self.tag_names[i].as_str())
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tag_names
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_boundary())
    }

    /// Total area of the triangulation.
    pub fn area(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Mesh size `1/sqrt(NNO)` with NNO the number of macro vertices.
    pub fn mesh_size(&self) -> f64 {
        1.0 / (self.num_vertices() as f64).sqrt()
    }

    /// Smallest macro edge length.
    pub fn min_edge_length(&self) -> f64 {
        (0..self.num_edges())
            .map(|e| self.edge_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the vertex closest to `p`.
    pub fn nearest_vertex(&self, p: Vec2) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.distance(p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Triangle containing `p` (barycentric tolerance `tol`), by linear search.
    pub fn locate(&self, p: Vec2, tol: f64) -> Option<usize> {
        (0..self.num_triangles()).find(|&t| {
            let [a, b, c] = self.triangle_points(t);
            crate::geometry::barycentric(p, a, b, c)
                .iter()
                .all(|&l| l >= -tol)
        })
    }

    /// Uniform `n x n` grid on the unit square.
    pub fn unit_square(n: usize) -> Result<Self, MeshError> {
        Self::rectangle(n, Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0))
    }

    /// Uniform `n x n` grid on the axis-aligned rectangle `[lo, hi]`.
    ///
    /// Every cell is cut along its lower-left to upper-right diagonal. The sides
    /// are tagged `bottom`, `right`, `top` and `left`.
    pub fn rectangle(n: usize, lo: Vec2, hi: Vec2) -> Result<Self, MeshError> {
        structured_quad(
            n,
            |s, t| Vec2::new(lo.x + s * (hi.x - lo.x), lo.y + t * (hi.y - lo.y)),
            ["bottom", "right", "top", "left"],
        )
    }

    /// Cook's membrane: the quadrilateral with corners (0,0), (48,44), (48,60),
    /// (0,44), meshed by the bilinear image of a uniform `n x n` grid.
    ///
    /// The edge at `x = 0` is tagged `clamped`, the edge at `x = 48` `loaded`,
    /// and the top and bottom edges `traction-free`.
    pub fn cook_membrane(n: usize) -> Result<Self, MeshError> {
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(48.0, 44.0),
            Vec2::new(48.0, 60.0),
            Vec2::new(0.0, 44.0),
        ];
        structured_quad(
            n,
            |s, t| {
                corners[0] * ((1.0 - s) * (1.0 - t))
                    + corners[1] * (s * (1.0 - t))
                    + corners[2] * (s * t)
                    + corners[3] * ((1.0 - s) * t)
            },
            ["traction-free", "loaded", "traction-free", "clamped"],
        )
    }
}

/// Maps the uniform grid on `[0,1]^2` through `map`. `tags` name the images of
/// the sides `t = 0`, `s = 1`, `t = 1` and `s = 0`, in that order.
fn structured_quad(
    n: usize,
    map: impl Fn(f64, f64) -> Vec2,
    tags: [&str; 4],
) -> Result<MacroMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidResolution(n));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let step = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact end points so that boundary vertices sit on the sides
            let s = if i == n { 1.0 } else { i as f64 * step };
            let t = if j == n { 1.0 } else { j as f64 * step };
            vertices.push(map(s, t));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push(([idx(i, 0), idx(i + 1, 0)], tags[0].to_string()));
        boundary.push(([idx(n, i), idx(n, i + 1)], tags[1].to_string()));
        boundary.push(([idx(i, n), idx(i + 1, n)], tags[2].to_string()));
        boundary.push(([idx(0, i), idx(0, i + 1)], tags[3].to_string()));
    }
    MacroMesh::from_parts(vertices, triangles, &boundary, DEFAULT_BOUNDARY_TAG)
}
