//! The enriched velocity space (affine vertex functions plus one bubble per
//! edge), the piecewise constant pressure space, projections and the Fortin
//! interpolant.
//!
//! Velocity coefficients come in two numberings. The raw numbering has
//! `2 * vertex + component` for vertex dofs and `2 * num_vertices + edge` for
//! bubble amplitudes. The free numbering only counts the unknowns left after
//! strong boundary conditions; every raw dof is an affine function of at most
//! one free dof (see [`DofLink`]).

mod basis;
mod bubble;

use std::sync::Arc;

use thiserror::Error;

pub use basis::{ElementBasis, LOCAL_DOFS};
pub use bubble::{
    bubble_table_csv, closed_form_centroid_value, compute_bubble, BubbleSide, EdgeBubble,
};

use crate::boundary::{BoundaryCondition, BoundaryConditions};
use crate::geometry::{outward_normal, Mat2, Vec2};
use crate::mesh::{MacroMesh, MeshError, SubdividedMesh};
use crate::quadrature::{gauss_legendre, triangle_rule};

/// Barycentric tolerance for point location inside a macro triangle.
pub const LOCATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("singular centroid system for the bubble of edge {edge} on triangle {triangle}")]
    SingularBubble { triangle: usize, edge: usize },
    #[error("split direction of edge {edge} is tangent to the edge")]
    DegenerateFlux { edge: usize },
    #[error("point ({x}, {y}) lies outside triangle {triangle}")]
    OutsideTriangle { triangle: usize, x: f64, y: f64 },
    #[error("conflicting boundary data at vertex {vertex}")]
    ConflictingBoundaryData { vertex: usize },
    #[error("no boundary condition for tag '{tag}'")]
    MissingBoundaryCondition { tag: String },
}

/// Which boundary conditions are built into the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// Dirichlet edges fix the whole velocity, normal-flux edges its normal part.
    #[default]
    FullDirichlet,
    /// Dirichlet and normal-flux edges fix only the normal part; tangential
    /// data must be imposed weakly.
    NormalOnly,
    /// Nothing is fixed; all boundary data must be imposed weakly.
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Enrichment {
    #[default]
    EdgeBubbles,
    /// Plain continuous affine velocities: every bubble is fixed to zero.
    None,
}

/// `raw = coef * free[index] + offset`, or `raw = offset` for fixed dofs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DofLink {
    pub free: Option<(usize, f64)>,
    pub offset: f64,
}

impl DofLink {
    fn fixed(offset: f64) -> Self {
        Self { free: None, offset }
    }
}

#[derive(Clone, Debug)]
pub struct FeSpace {
    subdiv: Arc<SubdividedMesh>,
    mode: ConstraintMode,
    enrichment: Enrichment,
    bases: Vec<ElementBasis>,
    links: Vec<DofLink>,
    num_free: usize,
}

/// Constraint collected at one boundary vertex.
#[derive(Default)]
struct VertexData {
    full: Vec<Vec2>,
    normal: Vec<(Vec2, f64)>,
}

/// Builds the space on `subdiv`, fixing the dofs required by `mode` from the
/// data in `bcs`.
pub fn build_space(
    subdiv: Arc<SubdividedMesh>,
    mode: ConstraintMode,
    enrichment: Enrichment,
    bcs: &BoundaryConditions,
) -> Result<FeSpace, SpaceError> {
    let mesh = subdiv.mesh();
    if let Some(tag) = bcs.missing_tag(mesh) {
        return Err(SpaceError::MissingBoundaryCondition {
            tag: tag.to_string(),
        });
    }
    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();

    // Fixed normal component of each constrained boundary edge, evaluated at
    // each endpoint, and whether the edge fixes the full vector.
    let mut vertex_data: Vec<VertexData> = (0..nv).map(|_| VertexData::default()).collect();
    let mut edge_fixed: Vec<Option<&BoundaryCondition>> = vec![None; ne];
    for e in mesh.boundary_edges() {
        let bc = bcs.for_edge(mesh, e).expect("checked above");
        let [a, b] = mesh.edge_points(e);
        let n = outward_normal_of(mesh, e);
        let (full, g) = match (mode, bc) {
            (ConstraintMode::FullDirichlet, BoundaryCondition::Dirichlet(g)) => (true, g),
            (
                ConstraintMode::FullDirichlet | ConstraintMode::NormalOnly,
                BoundaryCondition::NormalFlux(g),
            )
            | (ConstraintMode::NormalOnly, BoundaryCondition::Dirichlet(g)) => (false, g),
            _ => continue,
        };
        edge_fixed[e] = Some(bc);
        for (v, p) in mesh.edges()[e].vertices.into_iter().zip([a, b]) {
            let value = g(p);
            if full {
                vertex_data[v].full.push(value);
            } else {
                vertex_data[v].normal.push((n, n.dot(value)));
            }
        }
    }

    let mut links = vec![DofLink::fixed(0.0); 2 * nv + ne];
    let mut num_free = 0;
    let mut next = || {
        num_free += 1;
        num_free - 1
    };
    for (v, data) in vertex_data.iter().enumerate() {
        let conflict = || SpaceError::ConflictingBoundaryData { vertex: v };
        if let Some(&g) = data.full.first() {
            if data.full.iter().any(|h| !agrees(*h, g)) {
                return Err(conflict());
            }
            links[2 * v] = DofLink::fixed(g.x);
            links[2 * v + 1] = DofLink::fixed(g.y);
        } else if let Some(&(n0, g0)) = data.normal.first() {
            let corner = data.normal.iter().find(|(n, _)| n0.cross(*n).abs() > 1e-8);
            match corner {
                Some(&(n1, g1)) => {
                    let det = n0.cross(n1);
                    let u = Vec2::new((g0 * n1.y - n0.y * g1) / det, (n0.x * g1 - g0 * n1.x) / det);
                    if data
                        .normal
                        .iter()
                        .any(|(n, g)| !scalar_agrees(n.dot(u), *g))
                    {
                        return Err(conflict());
                    }
                    links[2 * v] = DofLink::fixed(u.x);
                    links[2 * v + 1] = DofLink::fixed(u.y);
                }
                None => {
                    if data
                        .normal
                        .iter()
                        .any(|(n, g)| !scalar_agrees(g * n.dot(n0), g0))
                    {
                        return Err(conflict());
                    }
                    let t = n0.perp();
                    let free = next();
                    links[2 * v] = DofLink {
                        free: Some((free, t.x)),
                        offset: n0.x * g0,
                    };
                    links[2 * v + 1] = DofLink {
                        free: Some((free, t.y)),
                        offset: n0.y * g0,
                    };
                }
            }
        } else {
            links[2 * v] = DofLink {
                free: Some((next(), 1.0)),
                offset: 0.0,
            };
            links[2 * v + 1] = DofLink {
                free: Some((next(), 1.0)),
                offset: 0.0,
            };
        }
    }

    for e in 0..ne {
        let dof = 2 * nv + e;
        if enrichment == Enrichment::None {
            links[dof] = DofLink::fixed(0.0);
            continue;
        }
        links[dof] = match edge_fixed[e] {
            None => DofLink {
                free: Some((next(), 1.0)),
                offset: 0.0,
            },
            Some(bc) => {
                let g = match bc {
                    BoundaryCondition::Dirichlet(g) | BoundaryCondition::NormalFlux(g) => g,
                    BoundaryCondition::Traction(_) => unreachable!(),
                };
                let [va, vb] = mesh.edges()[e].vertices;
                let fixed_vertex =
                    |v: usize| Vec2::new(links[2 * v].offset, links[2 * v + 1].offset);
                DofLink::fixed(flux_matched_amplitude(
                    &subdiv,
                    e,
                    |p| g(p),
                    fixed_vertex(va),
                    fixed_vertex(vb),
                )?)
            }
        };
    }

    let with_bubbles = enrichment == Enrichment::EdgeBubbles;
    let bases = (0..mesh.num_triangles())
        .map(|t| ElementBasis::new(&subdiv, t, with_bubbles))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(FeSpace {
        subdiv,
        mode,
        enrichment,
        bases,
        links,
        num_free,
    })
}

fn agrees(a: Vec2, b: Vec2) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

fn scalar_agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Outward normal of edge `e` with respect to its first incident triangle.
pub fn outward_normal_of(mesh: &MacroMesh, e: usize) -> Vec2 {
    let t = mesh.edges()[e].triangles.0;
    let k = mesh
        .local_edge_index(t, e)
        .expect("incident triangle contains its edge");
    let p = mesh.triangle_points(t);
    outward_normal(p[k], p[(k + 1) % 3])
}

/// Bubble amplitude that makes the flux of the discrete field through edge
/// `e` equal to the flux of `u`, given the field values at its endpoints.
fn flux_matched_amplitude(
    subdiv: &SubdividedMesh,
    e: usize,
    u: impl Fn(Vec2) -> Vec2,
    ua: Vec2,
    ub: Vec2,
) -> Result<f64, SpaceError> {
    let mesh = subdiv.mesh();
    let [a, b] = mesh.edge_points(e);
    let n = outward_normal_of(mesh, e);
    let len = a.distance(b);
    let nu_n = subdiv.direction(e).dot(n);
    if nu_n.abs() < 1e-12 {
        return Err(SpaceError::DegenerateFlux { edge: e });
    }
    let flux: f64 = gauss_legendre(5)
        .expect("five-point rule exists")
        .iter()
        .map(|&(s, w)| w * u(a + (b - a) * s).dot(n))
        .sum::<f64>()
        * len;
    let vertex_part = 0.5 * len * (n.dot(ua) + n.dot(ub));
    Ok((flux - vertex_part) / (0.5 * len * nu_n))
}

/// Per-triangle constant divergence with the largest deviation over the six
/// subtriangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacroDivergence {
    pub value: f64,
    pub max_deviation: f64,
}

impl FeSpace {
    pub fn subdivision(&self) -> &SubdividedMesh {
        &self.subdiv
    }

    pub fn subdivision_arc(&self) -> &Arc<SubdividedMesh> {
        &self.subdiv
    }

    pub fn mesh(&self) -> &MacroMesh {
        self.subdiv.mesh()
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    pub fn enrichment(&self) -> Enrichment {
        self.enrichment
    }

    pub fn basis(&self, t: usize) -> &ElementBasis {
        &self.bases[t]
    }

    pub fn links(&self) -> &[DofLink] {
        &self.links
    }

    /// `2 * vertices + edges`.
    pub fn num_raw_velocity(&self) -> usize {
        self.links.len()
    }

    pub fn num_free_velocity(&self) -> usize {
        self.num_free
    }

    pub fn num_pressure(&self) -> usize {
        self.mesh().num_triangles()
    }

    /// Raw dof of the bubble on edge `e`.
    pub fn bubble_dof(&self, e: usize) -> usize {
        2 * self.mesh().num_vertices() + e
    }

    /// Raw coefficients from free ones.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.num_free, "free vector length");
        self.links
            .iter()
            .map(|l| l.offset + l.free.map_or(0.0, |(i, c)| c * free[i]))
            .collect()
    }

    /// Raw coefficients with all fixed dofs at their values and free dofs zero.
    pub fn lift(&self) -> Vec<f64> {
        self.links
            .iter()
            .map(|l| if l.free.is_some() { 0.0 } else { l.offset })
            .collect()
    }

    pub fn locate(&self, t: usize, p: Vec2) -> Result<(usize, [f64; 3]), SpaceError> {
        self.bases[t]
            .locate(p, LOCATE_TOLERANCE)
            .ok_or(SpaceError::OutsideTriangle {
                triangle: t,
                x: p.x,
                y: p.y,
            })
    }

    pub fn eval_velocity(&self, raw: &[f64], t: usize, p: Vec2) -> Result<Vec2, SpaceError> {
        let (s, l) = self.locate(t, p)?;
        let b = &self.bases[t];
        Ok(b.combine_value(&b.gather(raw), s, l))
    }

    pub fn eval_velocity_gradient(
        &self,
        raw: &[f64],
        t: usize,
        p: Vec2,
    ) -> Result<Mat2, SpaceError> {
        let (s, _) = self.locate(t, p)?;
        let b = &self.bases[t];
        Ok(b.combine_gradient(&b.gather(raw), s))
    }

    pub fn macro_divergence(&self, raw: &[f64], t: usize) -> MacroDivergence {
        let b = &self.bases[t];
        let c = b.gather(raw);
        let divs: Vec<f64> = (0..6).map(|s| b.combine_gradient(&c, s).trace()).collect();
        let value = (0..6).map(|s| b.sub_areas[s] * divs[s]).sum::<f64>() / b.area;
        let max_deviation = divs.iter().map(|d| (d - value).abs()).fold(0.0, f64::max);
        MacroDivergence {
            value,
            max_deviation,
        }
    }

    /// Divergence on every macro triangle.
    pub fn divergence(&self, raw: &[f64]) -> Vec<f64> {
        (0..self.mesh().num_triangles())
            .map(|t| self.macro_divergence(raw, t).value)
            .collect()
    }

    /// Mean normal component of the field over boundary edge `e`, with the
    /// outward normal.
    pub fn face_mean_normal(&self, raw: &[f64], e: usize) -> f64 {
        let mesh = self.mesh();
        let t = mesh.edges()[e].triangles.0;
        let k = mesh
            .local_edge_index(t, e)
            .expect("incident triangle contains its edge");
        let b = &self.bases[t];
        let c = b.gather(raw);
        let n = outward_normal_of(mesh, e);
        let nodes = [k, 3 + k, (k + 1) % 3];
        let [u0, um, u1] = nodes.map(|i| b.node_value(&c, i).dot(n));
        let [p0, pm, p1] = nodes.map(|i| b.nodes[i]);
        let (l0, l1) = (p0.distance(pm), pm.distance(p1));
        0.5 * (l0 * (u0 + um) + l1 * (um + u1)) / (l0 + l1)
    }

    /// Fortin interpolant in the raw numbering: nodal vertex values and
    /// flux-matched bubble amplitudes (zero without enrichment).
    pub fn fortin_interpolate(&self, u: impl Fn(Vec2) -> Vec2) -> Result<Vec<f64>, SpaceError> {
        fortin_interpolate(&self.subdiv, self.enrichment, u)
    }

    /// Free coefficients closest to a raw vector: free dofs read from the raw
    /// values, fixed ones dropped.
    pub fn restrict(&self, raw: &[f64]) -> Vec<f64> {
        let mut free = vec![0.0; self.num_free];
        for (r, l) in raw.iter().zip(&self.links) {
            if let Some((i, c)) = l.free {
                // rotated vertex frames contribute through both components
                free[i] += c * (r - l.offset);
            }
        }
        free
    }
}

/// Fortin interpolant of `u` on `subdiv` in the raw numbering.
pub fn fortin_interpolate(
    subdiv: &SubdividedMesh,
    enrichment: Enrichment,
    u: impl Fn(Vec2) -> Vec2,
) -> Result<Vec<f64>, SpaceError> {
    let mesh = subdiv.mesh();
    let nv = mesh.num_vertices();
    let mut raw = vec![0.0; 2 * nv + mesh.num_edges()];
    for (v, &p) in mesh.vertices().iter().enumerate() {
        let value = u(p);
        raw[2 * v] = value.x;
        raw[2 * v + 1] = value.y;
    }
    if enrichment == Enrichment::EdgeBubbles {
        for e in 0..mesh.num_edges() {
            let [va, vb] = mesh.edges()[e].vertices;
            let at = |v: usize| Vec2::new(raw[2 * v], raw[2 * v + 1]);
            raw[2 * nv + e] = flux_matched_amplitude(subdiv, e, &u, at(va), at(vb))?;
        }
    }
    Ok(raw)
}

/// Mean value of `f` on macro triangle `t` (degree 6 quadrature). The
/// assembled mass source uses the same rule, so discrete divergences match
/// these means to rounding.
pub fn triangle_mean(f: impl Fn(Vec2) -> f64, mesh: &MacroMesh, t: usize) -> f64 {
    let rule = triangle_rule(6).expect("degree 6 rule exists");
    rule.integrate(mesh.triangle_points(t), &f) / mesh.triangle_area(t)
}

/// Elementwise mean values of `f` (degree 6 quadrature).
pub fn project_p0(f: impl Fn(Vec2) -> f64, mesh: &MacroMesh) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| triangle_mean(&f, mesh, t))
        .collect()
}

/// Velocity in the raw numbering and one pressure value per triangle.
#[derive(Clone, Debug)]
pub struct FieldSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl FieldSolution {
    pub fn vertex_velocity(&self, v: usize) -> Vec2 {
        Vec2::new(self.velocity[2 * v], self.velocity[2 * v + 1])
    }
}
