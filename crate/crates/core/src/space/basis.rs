//! The nine local velocity shape functions of one macro triangle.
//!
//! Local dofs `0..6` are the corner dofs `(corner i / 2, component i % 2)`,
//! carried by the affine hat functions of the macro triangle; dofs `6 + k`
//! are the bubbles of local edge `k`. Every shape function is stored by its
//! values at the seven local nodes, which determines it on the subtriangles.

use super::bubble::bubble_side;
use super::SpaceError;
use crate::geometry::{barycentric, barycentric_gradients, signed_area, Mat2, Vec2};
use crate::mesh::{SubdividedMesh, SUBTRIANGLE_NODES};

pub const LOCAL_DOFS: usize = 9;

#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub nodes: [Vec2; 7],
    pub area: f64,
    pub sub_areas: [f64; 6],
    /// Barycentric gradients of each subtriangle.
    pub sub_lambda_grads: [[Vec2; 3]; 6],
    /// `values[i][node]`: shape function `i` at local node `node`.
    pub values: [[Vec2; 7]; LOCAL_DOFS],
    /// `grads[s][i]`: constant gradient of shape function `i` on subtriangle `s`.
    pub grads: [[Mat2; LOCAL_DOFS]; 6],
    /// Macro-constant divergence of each shape function.
    pub divergence: [f64; LOCAL_DOFS],
    /// Raw global velocity dof of each local dof.
    pub dofs: [usize; LOCAL_DOFS],
    /// Bubble amplitude of the edge dofs is multiplied by this (1 with
    /// bubbles, 0 for the plain affine space).
    pub bubble_factor: f64,
}

impl ElementBasis {
    pub(crate) fn new(
        subdiv: &SubdividedMesh,
        t: usize,
        with_bubbles: bool,
    ) -> Result<Self, SpaceError> {
        let mesh = subdiv.mesh();
        let nodes = subdiv.local_nodes(t);
        let [a, b, c] = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);

        let mut values = [[Vec2::ZERO; 7]; LOCAL_DOFS];
        for (node, &p) in nodes.iter().enumerate() {
            let lambda = match node {
                0..=2 => {
                    let mut l = [0.0; 3];
                    l[node] = 1.0;
                    l
                }
                6 => [1.0 / 3.0; 3],
                _ => {
                    // split nodes lie on their edge: only two coordinates are nonzero
                    let k = node - 3;
                    let mut l = barycentric(p, a, b, c);
                    l[(k + 2) % 3] = 0.0;
                    let s = l[k] + l[(k + 1) % 3];
                    l.map(|x| x / s)
                }
            };
            for corner in 0..3 {
                for comp in 0..2 {
                    values[2 * corner + comp][node] = Vec2::unit(comp) * lambda[corner];
                }
            }
        }
        for k in 0..3 {
            values[6 + k] = bubble_side(subdiv, t, k)?.node_values;
        }

        let mut sub_areas = [0.0; 6];
        let mut sub_lambda_grads = [[Vec2::ZERO; 3]; 6];
        let mut grads = [[Mat2::ZERO; LOCAL_DOFS]; 6];
        for (s, sub) in SUBTRIANGLE_NODES.iter().enumerate() {
            let [p, q, r] = sub.map(|i| nodes[i]);
            sub_areas[s] = signed_area(p, q, r);
            sub_lambda_grads[s] = barycentric_gradients(p, q, r);
            for i in 0..LOCAL_DOFS {
                let mut g = Mat2::ZERO;
                for (corner, &node) in sub.iter().enumerate() {
                    g += Mat2::outer(values[i][node], sub_lambda_grads[s][corner]);
                }
                grads[s][i] = g;
            }
        }

        let mut divergence = [0.0; LOCAL_DOFS];
        for (i, div) in divergence.iter_mut().enumerate() {
            *div = (0..6)
                .map(|s| sub_areas[s] * grads[s][i].trace())
                .sum::<f64>()
                / area;
        }

        let verts = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        let nv = mesh.num_vertices();
        let mut dofs = [0; LOCAL_DOFS];
        for corner in 0..3 {
            dofs[2 * corner] = 2 * verts[corner];
            dofs[2 * corner + 1] = 2 * verts[corner] + 1;
        }
        for k in 0..3 {
            dofs[6 + k] = 2 * nv + edges[k];
        }

        Ok(Self {
            nodes,
            area,
            sub_areas,
            sub_lambda_grads,
            values,
            grads,
            divergence,
            dofs,
            bubble_factor: if with_bubbles { 1.0 } else { 0.0 },
        })
    }

    /// Subtriangle containing `p`, with its barycentric coordinates.
    pub fn locate(&self, p: Vec2, tol: f64) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (s, sub) in SUBTRIANGLE_NODES.iter().enumerate() {
            let [a, b, c] = sub.map(|i| self.nodes[i]);
            let l = barycentric(p, a, b, c);
            let worst = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, _, w)| worst > w) {
                best = Some((s, l, worst));
            }
        }
        best.filter(|&(_, _, w)| w >= -tol).map(|(s, l, _)| (s, l))
    }

    /// Value of shape function `i` at barycentric point `l` of subtriangle `s`.
    pub fn value(&self, i: usize, s: usize, l: [f64; 3]) -> Vec2 {
        let sub = SUBTRIANGLE_NODES[s];
        self.values[i][sub[0]] * l[0]
            + self.values[i][sub[1]] * l[1]
            + self.values[i][sub[2]] * l[2]
    }

    /// Local coefficients gathered from a raw global coefficient vector.
    pub fn gather(&self, raw: &[f64]) -> [f64; LOCAL_DOFS] {
        let mut c = self.dofs.map(|d| raw[d]);
        for v in &mut c[6..] {
            *v *= self.bubble_factor;
        }
        c
    }

    /// Field value at barycentric point `l` of subtriangle `s`.
    pub fn combine_value(&self, coeffs: &[f64; LOCAL_DOFS], s: usize, l: [f64; 3]) -> Vec2 {
        (0..LOCAL_DOFS).fold(Vec2::ZERO, |acc, i| acc + self.value(i, s, l) * coeffs[i])
    }

    /// Field value at local node `node`.
    pub fn node_value(&self, coeffs: &[f64; LOCAL_DOFS], node: usize) -> Vec2 {
        (0..LOCAL_DOFS).fold(Vec2::ZERO, |acc, i| acc + self.values[i][node] * coeffs[i])
    }

    pub fn combine_gradient(&self, coeffs: &[f64; LOCAL_DOFS], s: usize) -> Mat2 {
        (0..LOCAL_DOFS).fold(Mat2::ZERO, |acc, i| acc + self.grads[s][i].scale(coeffs[i]))
    }
}
