//! Edge bubbles with constant divergence on each macro triangle.
//!
//! The bubble of edge `E` is piecewise linear on the subtriangles. On a macro
//! triangle `T` containing `E` it vanishes at the corners and at the other two
//! split nodes, equals the split direction `nu` at the split node of `E`, and
//! takes a centroid value `u_m` chosen so that the divergence is the same on
//! all six subtriangles. By the divergence theorem that common value is
//! `|E| (nu . n_E) / (2 |T|)`.
//!
//! On the two children that do not touch `E` the bubble is linear and vanishes
//! on the outer edge, so its divergence there is `u_m . n_in / h` with `n_in`
//! the inward normal of the outer edge and `h` the centroid's distance to it.
//! Setting both to the target value fixes `u_m`; the two halves of the child on
//! `E` then follow because `nu` is parallel to the split line.

use std::fmt::Write as _;

use super::SpaceError;
use crate::geometry::{outward_normal, Vec2};
use crate::mesh::{NodeRole, SubdividedMesh};

/// The bubble of one edge restricted to one incident macro triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct BubbleSide {
    pub triangle: usize,
    pub local_edge: usize,
    /// Value at the centroid.
    pub centroid_value: Vec2,
    /// Constant divergence on all six subtriangles.
    pub divergence: f64,
    /// Values at the seven local nodes (see [`NodeRole`]).
    pub node_values: [Vec2; 7],
}

/// Bubble attached to an edge: one side per incident macro triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeBubble {
    pub edge: usize,
    pub direction: Vec2,
    pub sides: Vec<BubbleSide>,
}

/// Builds the bubble of `edge` on each incident triangle.
pub fn compute_bubble(subdiv: &SubdividedMesh, edge: usize) -> Result<EdgeBubble, SpaceError> {
    let mesh = subdiv.mesh();
    let (t0, t1) = mesh.edges()[edge].triangles;
    let mut sides = Vec::with_capacity(2);
    for t in std::iter::once(t0).chain(t1) {
        let k = mesh
            .local_edge_index(t, edge)
            .expect("incident triangle contains its edge");
        sides.push(bubble_side(subdiv, t, k)?);
    }
    Ok(EdgeBubble {
        edge,
        direction: subdiv.direction(edge),
        sides,
    })
}

pub(crate) fn bubble_side(
    subdiv: &SubdividedMesh,
    t: usize,
    k: usize,
) -> Result<BubbleSide, SpaceError> {
    let mesh = subdiv.mesh();
    let corners = mesh.triangle_points(t);
    let centroid = subdiv.centroid(t);
    let edge = mesh.triangle_edges(t)[k];
    let nu = subdiv.direction(edge);
    let (a, b) = (corners[k], corners[(k + 1) % 3]);
    let target = a.distance(b) * nu.dot(outward_normal(a, b)) / (2.0 * mesh.triangle_area(t));

    let rows: Vec<Vec2> = [1, 2]
        .iter()
        .map(|off| {
            let j = (k + off) % 3;
            let (p, q) = (corners[j], corners[(j + 1) % 3]);
            let inward = -outward_normal(p, q);
            let height = (centroid - p).dot(inward);
            inward / height
        })
        .collect();
    let det = rows[0].cross(rows[1]);
    let scale = rows[0].norm() * rows[1].norm();
    if det.abs() <= 1e-12 * scale {
        return Err(SpaceError::SingularBubble { triangle: t, edge });
    }
    let centroid_value = Vec2::new(
        target * (rows[1].y - rows[0].y) / det,
        target * (rows[0].x - rows[1].x) / det,
    );

    let mut node_values = [Vec2::ZERO; 7];
    node_values[3 + k] = nu;
    node_values[6] = centroid_value;
    Ok(BubbleSide {
        triangle: t,
        local_edge: k,
        centroid_value,
        divergence: target,
        node_values,
    })
}

/// Closed-form centroid value `D (x_c - x_o)` with `x_o` the corner opposite
/// the edge, `x_c` the centroid, `x_i` the split node, `x_l, x_r` the edge
/// ends and `D = 2 area(x_l, x_r, x_c) / (2 |T| |x_i - x_c|)`, signed by the
/// orientation of `nu` relative to the outward normal.
///
/// Kept for cross-checking [`compute_bubble`]; the assembly does not use it.
pub fn closed_form_centroid_value(subdiv: &SubdividedMesh, t: usize, k: usize) -> Vec2 {
    let mesh = subdiv.mesh();
    let corners = mesh.triangle_points(t);
    let (xl, xr, xo) = (corners[k], corners[(k + 1) % 3], corners[(k + 2) % 3]);
    let edge = mesh.triangle_edges(t)[k];
    let xi = subdiv.split_point(edge);
    let xc = subdiv.centroid(t);
    let numerator = xr.x * (xc.y - xl.y) + xc.x * (xl.y - xr.y) + xl.x * (xr.y - xc.y);
    let d = numerator / (2.0 * mesh.triangle_area(t) * xi.distance(xc));
    let sign = subdiv.direction(edge).dot(outward_normal(xl, xr)).signum();
    (xc - xo) * (sign * d)
}

/// CSV dump of every bubble: `edge,triangle,node,role,value_x,value_y`.
pub fn bubble_table_csv(subdiv: &SubdividedMesh) -> Result<String, SpaceError> {
    let mut out = String::from("edge,triangle,node,role,value_x,value_y\n");
    for e in 0..subdiv.mesh().num_edges() {
        for side in compute_bubble(subdiv, e)?.sides {
            for (node, v) in side.node_values.iter().enumerate() {
                writeln!(
                    out,
                    "{e},{},{node},{},{:e},{:e}",
                    side.triangle,
                    NodeRole::of(node).name(),
                    v.x,
                    v.y
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}
