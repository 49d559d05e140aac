//! Error norms of discrete solutions against exact fields.

use crate::assembly::Model;
use crate::geometry::{Mat2, Vec2};
use crate::mesh::SUBTRIANGLE_NODES;
use crate::quadrature::triangle_rule;
use crate::space::{project_p0, FeSpace, FieldSolution};

use super::cases::ManufacturedCase;

/// Errors of one solve. Pressure errors are `None` for elasticity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRecord {
    pub l2_velocity: f64,
    pub h1_velocity: f64,
    pub l2_pressure: Option<f64>,
    /// `|pi_0 p - p_h|`.
    pub projected_pressure: Option<f64>,
    pub divergence: f64,
    /// `|||e|||_E` for elasticity, `|||e_u, e_p|||_B` for Brinkman.
    pub energy: f64,
}

/// Integrates the errors of `solution` with a degree 6 rule on every subtriangle.
pub fn error_norms(
    space: &FeSpace,
    solution: &FieldSolution,
    case: &ManufacturedCase,
) -> ErrorRecord {
    let rule = triangle_rule(6).expect("degree 6 rule exists");
    let mesh = space.mesh();
    let (mut l2, mut h1, mut div, mut eps, mut lp) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let b = space.basis(t);
        let c = b.gather(&solution.velocity);
        let ph = solution.pressure.get(t).copied().unwrap_or(0.0);
        for s in 0..6 {
            let tri = SUBTRIANGLE_NODES[s].map(|i| b.nodes[i]);
            let gh = b.combine_gradient(&c, s);
            let jac = 2.0 * b.sub_areas[s];
            for (l, w) in rule.barycentric() {
                let x = tri[0] * l[0] + tri[1] * l[1] + tri[2] * l[2];
                let e = (case.velocity)(x) - b.combine_value(&c, s, l);
                let ge: Mat2 = (case.velocity_gradient)(x) - gh;
                let wj = w * jac;
                l2 += wj * e.dot(e);
                h1 += wj * ge.ddot(&ge);
                div += wj * ge.trace().powi(2);
                let se = ge.sym();
                eps += wj * se.ddot(&se);
                if let Some(p) = &case.pressure {
                    lp += wj * (p(x) - ph).powi(2);
                }
            }
        }
    }
    let (l2_pressure, projected_pressure) = match &case.pressure {
        Some(p) => {
            let pi0 = project_p0(|x| p(x), mesh);
            let proj: f64 = (0..mesh.num_triangles())
                .map(|t| mesh.triangle_area(t) * (pi0[t] - solution.pressure[t]).powi(2))
                .sum();
            (Some(lp.sqrt()), Some(proj.sqrt()))
        }
        None => (None, None),
    };
    let energy = match case.model {
        Model::Elasticity => 2.0 * case.mu * eps + case.lambda * div,
        Model::Brinkman => case.mu * h1 + case.sigma * l2 + div + lp / (case.mu + case.sigma),
    };
    ErrorRecord {
        l2_velocity: l2.sqrt(),
        h1_velocity: h1.sqrt(),
        l2_pressure,
        projected_pressure,
        divergence: div.sqrt(),
        energy: energy.sqrt(),
    }
}

/// `max_T |div u_h - pi_0 g|` relative to the largest velocity gradient
/// entry of the solution (at least one).
pub fn divergence_defect(space: &FeSpace, velocity: &[f64], source: impl Fn(Vec2) -> f64) -> f64 {
    let mesh = space.mesh();
    let g = project_p0(source, mesh);
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for (t, &gt) in g.iter().enumerate() {
        let b = space.basis(t);
        let c = b.gather(velocity);
        for s in 0..6 {
            scale = scale.max(b.combine_gradient(&c, s).max_abs());
        }
        let d = space.macro_divergence(velocity, t);
        worst = worst.max((d.value - gt).abs()).max(d.max_deviation);
    }
    worst / scale
}

/// Net outward flux `int_{boundary} u_h . n` and the sum of the absolute
/// edge fluxes.
pub fn boundary_flux(space: &FeSpace, velocity: &[f64]) -> (f64, f64) {
    let mesh = space.mesh();
    mesh.boundary_edges().fold((0.0, 0.0), |(net, abs), e| {
        let q = space.face_mean_normal(velocity, e) * mesh.edge_length(e);
        (net + q, abs + q.abs())
    })
}
