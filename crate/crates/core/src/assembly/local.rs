//! Element and boundary-face integrals on one macro triangle.
//!
//! Velocity gradients are constant on each subtriangle and velocities are
//! linear on each boundary segment, so every bilinear term is integrated in
//! closed form. Data terms use quadrature.

use crate::boundary::BoundaryCondition;
use crate::geometry::{outward_normal, Mat2, Vec2};
use crate::mesh::SUBTRIANGLE_NODES;
use crate::quadrature::TriangleRule;
use crate::space::{triangle_mean, ElementBasis, FeSpace, LOCAL_DOFS};

use super::{Nitsche, ProblemCoefficients, VolumeForm};

const N: usize = LOCAL_DOFS;

/// Contributions of one macro triangle in the raw local numbering.
#[derive(Clone, Debug)]
pub(crate) struct Local {
    pub k: [[f64; N]; N],
    pub f: [f64; N],
    /// Velocity rows against the pressure of this triangle.
    pub b_row: [f64; N],
    /// Pressure row of this triangle against velocity columns.
    pub b_col: [f64; N],
    /// Pressure row right-hand side.
    pub g: f64,
}

pub(crate) struct Rules<'a> {
    pub volume: &'a TriangleRule,
    pub line: &'a [(f64, f64)],
}

/// Half of a boundary face lying on one subtriangle.
struct Segment {
    nodes: [usize; 2],
    sub: usize,
    points: [Vec2; 2],
    len: f64,
}

fn segments(b: &ElementBasis, k: usize) -> [Segment; 2] {
    let seg = |a: usize, c: usize, sub: usize| {
        let points = [b.nodes[a], b.nodes[c]];
        Segment {
            nodes: [a, c],
            sub,
            points,
            len: points[0].distance(points[1]),
        }
    };
    [seg(k, 3 + k, 2 * k), seg(3 + k, (k + 1) % 3, 2 * k + 1)]
}

/// `int_seg u v` for functions linear on the segment.
fn lin_lin(len: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    len / 6.0 * (2.0 * u[0] * v[0] + u[0] * v[1] + u[1] * v[0] + 2.0 * u[1] * v[1])
}

fn mean(len: f64, u: [f64; 2]) -> f64 {
    0.5 * len * (u[0] + u[1])
}

pub(crate) fn local_contribution(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
    volume: VolumeForm,
    nitsche: Nitsche,
    pressure: bool,
    rules: &Rules,
    t: usize,
) -> Local {
    let b = space.basis(t);
    let mu = coeffs.mu.at(t);
    let sigma = coeffs.sigma.at(t);
    let lambda = coeffs.lambda;
    let mut loc = Local {
        k: [[0.0; N]; N],
        f: [0.0; N],
        b_row: [0.0; N],
        b_col: [0.0; N],
        g: 0.0,
    };

    for s in 0..6 {
        let area = b.sub_areas[s];
        let grads = &b.grads[s];
        let sub = SUBTRIANGLE_NODES[s];
        match volume {
            VolumeForm::Elasticity => {
                let eps: [Mat2; N] = grads.map(|g| g.sym());
                for i in 0..N {
                    for j in 0..N {
                        loc.k[i][j] += area
                            * (2.0 * mu * eps[i].ddot(&eps[j])
                                + lambda * grads[i].trace() * grads[j].trace());
                    }
                }
            }
            VolumeForm::Brinkman => {
                for i in 0..N {
                    for j in 0..N {
                        let mut m = 0.0;
                        if sigma != 0.0 {
                            for (a, &na) in sub.iter().enumerate() {
                                for (c, &nc) in sub.iter().enumerate() {
                                    let w = if a == c { 2.0 } else { 1.0 };
                                    m += w * b.values[i][na].dot(b.values[j][nc]);
                                }
                            }
                        }
                        loc.k[i][j] += area * (mu * grads[i].ddot(&grads[j]) + sigma * m / 12.0);
                    }
                }
            }
        }

        let tri = sub.map(|n| b.nodes[n]);
        let jac = 2.0 * area;
        for (l, w) in rules.volume.barycentric() {
            let x = tri[0] * l[0] + tri[1] * l[1] + tri[2] * l[2];
            let f = (coeffs.body_force)(x);
            for i in 0..N {
                loc.f[i] += w * jac * f.dot(b.value(i, s, l));
            }
        }
    }

    if pressure {
        let mesh = space.mesh();
        loc.g = -mesh.triangle_area(t) * triangle_mean(|x| (coeffs.source)(x), mesh, t);
        for i in 0..N {
            loc.b_row[i] = -b.divergence[i] * b.area;
            loc.b_col[i] = loc.b_row[i];
        }
    }

    let mesh = space.mesh();
    let corners = mesh.triangle_points(t);
    for (k, &e) in mesh.triangle_edges(t).iter().enumerate() {
        let Some(bc) = coeffs.boundary.for_edge(mesh, e) else {
            continue;
        };
        let n = outward_normal(corners[k], corners[(k + 1) % 3]);
        let segs = segments(b, k);
        let face = FaceData {
            b,
            segs: &segs,
            n,
            h: corners[k].distance(corners[(k + 1) % 3]),
            line: rules.line,
        };
        match (bc, nitsche) {
            (BoundaryCondition::Traction(h), _) => face.load(&mut loc, |x| h(x)),
            (BoundaryCondition::Dirichlet(g), Nitsche::Elasticity) => {
                face.elasticity(&mut loc, mu, lambda, coeffs.gamma, true, |x| g(x))
            }
            (BoundaryCondition::NormalFlux(g), Nitsche::Elasticity) => {
                face.elasticity(&mut loc, mu, lambda, coeffs.gamma, false, |x| g(x))
            }
            (BoundaryCondition::Dirichlet(g), Nitsche::Tangential) => {
                face.tangential(&mut loc, mu, coeffs.gamma, |x| g(x))
            }
            (BoundaryCondition::Dirichlet(g), Nitsche::Slip) => {
                face.slip(&mut loc, mu, sigma, coeffs.gamma, pressure, |x| g(x));
                face.tangential(&mut loc, mu, coeffs.gamma, |x| g(x));
            }
            (BoundaryCondition::NormalFlux(g), Nitsche::Slip) => {
                face.slip(&mut loc, mu, sigma, coeffs.gamma, pressure, |x| g(x))
            }
            _ => {}
        }
    }
    loc
}

struct FaceData<'a> {
    b: &'a ElementBasis,
    segs: &'a [Segment; 2],
    n: Vec2,
    h: f64,
    line: &'a [(f64, f64)],
}

impl FaceData<'_> {
    /// Shape function `i` at both ends of segment `seg`.
    fn ends(&self, i: usize, seg: &Segment) -> [Vec2; 2] {
        seg.nodes.map(|node| self.b.values[i][node])
    }

    /// Quadrature over both segments: `f(x, segment, barycentric weight of the second end)`.
    fn integrate(&self, mut f: impl FnMut(Vec2, &Segment, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for seg in self.segs {
            for &(s, w) in self.line {
                let x = seg.points[0] + (seg.points[1] - seg.points[0]) * s;
                sum += w * seg.len * f(x, seg, s);
            }
        }
        sum
    }

    fn value_at(&self, i: usize, seg: &Segment, s: f64) -> Vec2 {
        let [a, c] = self.ends(i, seg);
        a * (1.0 - s) + c * s
    }

    /// `int_F phi_i . n` for every shape function.
    fn normal_fluxes(&self) -> [f64; N] {
        std::array::from_fn(|i| {
            self.segs
                .iter()
                .map(|seg| mean(seg.len, self.ends(i, seg).map(|v| v.dot(self.n))))
                .sum()
        })
    }

    fn load(&self, loc: &mut Local, h: impl Fn(Vec2) -> Vec2) {
        for i in 0..N {
            loc.f[i] += self.integrate(|x, seg, s| h(x).dot(self.value_at(i, seg, s)));
        }
    }

    /// Symmetric Nitsche terms for elasticity. With `full` the whole vector is
    /// imposed (tangential stress and penalty included), otherwise only the
    /// normal component. The lambda part of the penalty acts on face means.
    fn elasticity(
        &self,
        loc: &mut Local,
        mu: f64,
        lambda: f64,
        gamma: f64,
        full: bool,
        g: impl Fn(Vec2) -> Vec2,
    ) {
        let n = self.n;
        let penalty = gamma * mu / self.h;
        let mean_penalty = gamma * lambda / (self.h * self.h);
        let fluxes = self.normal_fluxes();
        let data_flux = self.integrate(|x, _, _| g(x).dot(n));
        // traction of each shape function per segment
        let traction = |i: usize, seg: &Segment| {
            let grad = self.b.grads[seg.sub][i];
            (grad.sym().scale(2.0 * mu)).mul_vec(n) + n * (lambda * grad.trace())
        };
        for seg in self.segs {
            let tr: [Vec2; N] = std::array::from_fn(|i| traction(i, seg));
            let vals: [[Vec2; 2]; N] = std::array::from_fn(|i| self.ends(i, seg));
            for i in 0..N {
                for j in 0..N {
                    let (consistency, pen) = if full {
                        let vi = vals[i];
                        let vj = vals[j];
                        let mi = (vi[0] + vi[1]) * (0.5 * seg.len);
                        let mj = (vj[0] + vj[1]) * (0.5 * seg.len);
                        let pen = lin_lin(seg.len, vi.map(|v| v.x), vj.map(|v| v.x))
                            + lin_lin(seg.len, vi.map(|v| v.y), vj.map(|v| v.y));
                        (tr[j].dot(mi) + tr[i].dot(mj), pen)
                    } else {
                        let ni = vals[i].map(|v| v.dot(n));
                        let nj = vals[j].map(|v| v.dot(n));
                        (
                            n.dot(tr[j]) * mean(seg.len, ni) + n.dot(tr[i]) * mean(seg.len, nj),
                            lin_lin(seg.len, ni, nj),
                        )
                    };
                    loc.k[i][j] += -consistency + penalty * pen;
                }
            }
        }
        for i in 0..N {
            for j in 0..N {
                loc.k[i][j] += mean_penalty * fluxes[i] * fluxes[j];
            }
            loc.f[i] += mean_penalty * data_flux * fluxes[i];
            loc.f[i] += self.integrate(|x, seg, s| {
                let gx = g(x);
                let phi = self.value_at(i, seg, s);
                let tr = traction(i, seg);
                if full {
                    gx.dot(phi * penalty - tr)
                } else {
                    gx.dot(n) * (penalty * phi.dot(n) - n.dot(tr))
                }
            });
        }
    }

    /// Symmetric Nitsche terms on the tangential component (Brinkman).
    fn tangential(&self, loc: &mut Local, mu: f64, gamma: f64, g: impl Fn(Vec2) -> Vec2) {
        if mu == 0.0 {
            return;
        }
        let (n, t) = (self.n, self.n.perp());
        let penalty = gamma * mu / self.h;
        let stress = |i: usize, seg: &Segment| mu * t.dot(self.b.grads[seg.sub][i].mul_vec(n));
        for seg in self.segs {
            let st: [f64; N] = std::array::from_fn(|i| stress(i, seg));
            let tv: [[f64; 2]; N] = std::array::from_fn(|i| self.ends(i, seg).map(|v| v.dot(t)));
            for i in 0..N {
                for j in 0..N {
                    loc.k[i][j] += -st[j] * mean(seg.len, tv[i]) - st[i] * mean(seg.len, tv[j])
                        + penalty * lin_lin(seg.len, tv[i], tv[j]);
                }
            }
        }
        for i in 0..N {
            loc.f[i] += self.integrate(|x, seg, s| {
                g(x).dot(t) * (penalty * self.value_at(i, seg, s).dot(t) - stress(i, seg))
            });
        }
    }

    /// Nitsche terms on the normal component with the one-sided pressure
    /// coupling of the slip formulation.
    fn slip(
        &self,
        loc: &mut Local,
        mu: f64,
        sigma: f64,
        gamma: f64,
        pressure: bool,
        g: impl Fn(Vec2) -> Vec2,
    ) {
        let n = self.n;
        let penalty = gamma * (mu + sigma) / self.h;
        let stress = |i: usize, seg: &Segment| mu * n.dot(self.b.grads[seg.sub][i].mul_vec(n));
        for seg in self.segs {
            let st: [f64; N] = std::array::from_fn(|i| stress(i, seg));
            let nv: [[f64; 2]; N] = std::array::from_fn(|i| self.ends(i, seg).map(|v| v.dot(n)));
            for i in 0..N {
                for j in 0..N {
                    loc.k[i][j] += -st[j] * mean(seg.len, nv[i]) - st[i] * mean(seg.len, nv[j])
                        + penalty * lin_lin(seg.len, nv[i], nv[j]);
                }
            }
        }
        if pressure {
            for (row, flux) in loc.b_row.iter_mut().zip(self.normal_fluxes()) {
                *row += flux;
            }
        }
        for i in 0..N {
            loc.f[i] += self.integrate(|x, seg, s| {
                g(x).dot(n) * (penalty * self.value_at(i, seg, s).dot(n) - stress(i, seg))
            });
        }
    }
}
