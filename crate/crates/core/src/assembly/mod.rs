//! Assembly of the elasticity and Brinkman systems, with strong or Nitsche
//! boundary conditions, into one sparse matrix over the free unknowns.
//!
//! Unknown order: free velocity dofs, one pressure per triangle, then the
//! mean-value multiplier when no traction boundary fixes the pressure level.
//!
//! The Brinkman form `a(u,v) - b(p,v) + b(q,u)` is stored with the pressure
//! test rows negated, i.e. the pressure rows hold `-b(q,u) = -(g,q)`. The
//! matrix is then symmetric; only the slip formulation, whose boundary
//! pressure coupling has no pressure-test counterpart, breaks the symmetry.

mod local;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::boundary::{
    zero_scalar_field, zero_vector_field, BoundaryCondition, BoundaryConditions, ScalarField,
    VectorField,
};
use crate::geometry::Vec2;
use crate::mesh::{MacroMesh, SubdividedMesh};
use crate::quadrature::{gauss_legendre, triangle_rule};
use crate::space::{build_space, ConstraintMode, Enrichment, FeSpace, FieldSolution, SpaceError};
use crate::sparse::CsrMatrix;

use local::{local_contribution, Rules};

/// Nitsche penalty used when none is given.
pub const DEFAULT_GAMMA: f64 = 10.0;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error(
        "zero viscosity with strongly imposed Dirichlet data on tag '{tag}'; \
         use the normal-only constraint mode (--bc nitsche-tangential)"
    )]
    ZeroViscosityDirichlet { tag: String },
    #[error("the {model:?} model has no formulation for constraint mode {mode:?}")]
    UnsupportedMode { model: Model, mode: ConstraintMode },
}

/// A coefficient that is constant on each macro triangle.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    PerTriangle(Vec<f64>),
}

impl Coefficient {
    /// Samples `f` at the triangle centroids.
    pub fn by_centroid(mesh: &MacroMesh, f: impl Fn(Vec2) -> f64) -> Self {
        Coefficient::PerTriangle(
            (0..mesh.num_triangles())
                .map(|t| {
                    let [a, b, c] = mesh.triangle_points(t);
                    f((a + b + c) / 3.0)
                })
                .collect(),
        )
    }

    pub fn at(&self, t: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PerTriangle(v) => v[t],
        }
    }

    fn values(&self, count: usize) -> Vec<f64> {
        (0..count).map(|t| self.at(t)).collect()
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// `-div(2 mu eps(u) + lambda div(u) I) = f`.
    Elasticity,
    /// `-mu lap(u) + sigma u + grad p = f`, `div u = g`.
    Brinkman,
}

#[derive(Clone)]
pub struct ProblemCoefficients {
    pub mu: Coefficient,
    pub lambda: f64,
    pub sigma: Coefficient,
    pub gamma: f64,
    pub body_force: VectorField,
    pub source: ScalarField,
    pub boundary: BoundaryConditions,
}

impl std::fmt::Debug for ProblemCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemCoefficients")
            .field("mu", &self.mu)
            .field("lambda", &self.lambda)
            .field("sigma", &self.sigma)
            .field("gamma", &self.gamma)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl ProblemCoefficients {
    pub fn elasticity(
        mu: f64,
        lambda: f64,
        body_force: VectorField,
        boundary: BoundaryConditions,
    ) -> Self {
        Self {
            mu: mu.into(),
            lambda,
            sigma: 0.0.into(),
            gamma: DEFAULT_GAMMA,
            body_force,
            source: zero_scalar_field(),
            boundary,
        }
    }

    pub fn brinkman(
        mu: impl Into<Coefficient>,
        sigma: impl Into<Coefficient>,
        body_force: VectorField,
        source: ScalarField,
        boundary: BoundaryConditions,
    ) -> Self {
        Self {
            mu: mu.into(),
            lambda: 0.0,
            sigma: sigma.into(),
            gamma: DEFAULT_GAMMA,
            body_force,
            source,
            boundary,
        }
    }

    /// Stokes flow with unit viscosity and homogeneous data.
    pub fn stokes(boundary: BoundaryConditions) -> Self {
        Self::brinkman(1.0, 0.0, zero_vector_field(), zero_scalar_field(), boundary)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self, model: Model, mesh: &MacroMesh) -> Result<(), AssemblyError> {
        let bad = |m: String| Err(AssemblyError::InvalidCoefficients(m));
        let nt = mesh.num_triangles();
        let mu = self.mu.values(nt);
        let sigma = self.sigma.values(nt);
        if let Coefficient::PerTriangle(v) = &self.mu {
            if v.len() != nt {
                return bad(format!("mu has {} values for {nt} triangles", v.len()));
            }
        }
        if let Coefficient::PerTriangle(v) = &self.sigma {
            if v.len() != nt {
                return bad(format!("sigma has {} values for {nt} triangles", v.len()));
            }
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        match model {
            Model::Elasticity => {
                if let Some(m) = mu.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
                    return bad(format!("mu must be positive for elasticity, got {m}"));
                }
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return bad(format!("lambda must be positive, got {}", self.lambda));
                }
            }
            Model::Brinkman => {
                for t in 0..nt {
                    let (m, s) = (mu[t], sigma[t]);
                    if !(m >= 0.0 && s >= 0.0 && m.is_finite() && s.is_finite()) {
                        return bad(format!(
                            "mu and sigma must be non-negative (triangle {t}: {m}, {s})"
                        ));
                    }
                    if m + s <= 0.0 {
                        return bad(format!("mu + sigma vanishes on triangle {t}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub velocity: usize,
    pub pressure: usize,
    pub multiplier: usize,
}

impl BlockLayout {
    pub fn total(&self) -> usize {
        self.velocity + self.pressure + self.multiplier
    }

    pub fn pressure_offset(&self) -> usize {
        self.velocity
    }

    pub fn multiplier_offset(&self) -> usize {
        self.velocity + self.pressure
    }
}

#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub layout: BlockLayout,
    pub model: Model,
    /// Whether the formulation is symmetric by construction.
    pub symmetric: bool,
}

impl SaddleSystem {
    /// The same system with the multiplier row and column removed.
    pub fn without_multiplier(&self) -> Self {
        let n = self.layout.velocity + self.layout.pressure;
        Self {
            matrix: self.matrix.leading(n),
            rhs: self.rhs[..n].to_vec(),
            layout: BlockLayout {
                multiplier: 0,
                ..self.layout
            },
            model: self.model,
            symmetric: self.symmetric,
        }
    }

    /// Vector with unit pressures and zero elsewhere; a null vector of the
    /// matrix when nothing fixes the pressure level.
    pub fn constant_pressure(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.layout.total()];
        let p0 = self.layout.pressure_offset();
        for x in &mut v[p0..p0 + self.layout.pressure] {
            *x = 1.0;
        }
        v
    }

    /// Splits a solution vector into raw velocity coefficients and pressures.
    pub fn field_solution(&self, space: &FeSpace, x: &[f64]) -> FieldSolution {
        let l = &self.layout;
        FieldSolution {
            velocity: space.expand(&x[..l.velocity]),
            pressure: x[l.pressure_offset()..l.multiplier_offset()].to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VolumeForm {
    Elasticity,
    Brinkman,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Nitsche {
    None,
    Elasticity,
    Tangential,
    Slip,
}

/// Picks the formulation matching the constraint mode of `space`: strong
/// conditions for full Dirichlet, Nitsche terms otherwise.
pub fn assemble(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
    model: Model,
) -> Result<SaddleSystem, AssemblyError> {
    match (model, space.mode()) {
        (Model::Elasticity, ConstraintMode::FullDirichlet) => assemble_elasticity(space, coeffs),
        (Model::Elasticity, ConstraintMode::Unconstrained) => {
            assemble_nitsche_elasticity(space, coeffs)
        }
        (Model::Brinkman, ConstraintMode::FullDirichlet) => assemble_brinkman(space, coeffs),
        (Model::Brinkman, ConstraintMode::NormalOnly) => {
            assemble_nitsche_brinkman_tangential(space, coeffs)
        }
        (Model::Brinkman, ConstraintMode::Unconstrained) => assemble_nitsche_slip(space, coeffs),
        (model, mode) => Err(AssemblyError::UnsupportedMode { model, mode }),
    }
}

/// Elasticity with the boundary conditions built into the space; traction
/// edges contribute loads.
pub fn assemble_elasticity(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Elasticity, space.mesh())?;
    Ok(assemble_with(
        space,
        coeffs,
        VolumeForm::Elasticity,
        Nitsche::None,
    ))
}

/// Brinkman saddle point system with the boundary conditions built into the space.
pub fn assemble_brinkman(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Brinkman, space.mesh())?;
    if space.mode() == ConstraintMode::FullDirichlet {
        let mesh = space.mesh();
        for e in mesh.boundary_edges() {
            let t = mesh.edges()[e].triangles.0;
            if coeffs.mu.at(t) == 0.0 {
                if let Some(BoundaryCondition::Dirichlet(_)) = coeffs.boundary.for_edge(mesh, e) {
                    return Err(AssemblyError::ZeroViscosityDirichlet {
                        tag: mesh.edge_tag(e).unwrap_or_default().to_string(),
                    });
                }
            }
        }
    }
    Ok(assemble_with(
        space,
        coeffs,
        VolumeForm::Brinkman,
        Nitsche::None,
    ))
}

/// Elasticity with all Dirichlet and normal-flux data imposed by Nitsche's
/// method; the lambda part of the penalty acts on face-mean normal traces.
pub fn assemble_nitsche_elasticity(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Elasticity, space.mesh())?;
    expect_mode(space, Model::Elasticity, ConstraintMode::Unconstrained)?;
    let mesh = space.mesh();
    let has_dirichlet = mesh.boundary_edges().any(|e| {
        matches!(
            coeffs.boundary.for_edge(mesh, e),
            Some(BoundaryCondition::Dirichlet(_))
        )
    });
    if !has_dirichlet {
        log::warn!("no Dirichlet boundary: the tangential rigid motions may be left unconstrained");
    }
    Ok(assemble_with(
        space,
        coeffs,
        VolumeForm::Elasticity,
        Nitsche::Elasticity,
    ))
}

/// Brinkman on the space with strong normal conditions; tangential Dirichlet
/// data are imposed by Nitsche's method and vanish with the viscosity.
pub fn assemble_nitsche_brinkman_tangential(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Brinkman, space.mesh())?;
    expect_mode(space, Model::Brinkman, ConstraintMode::NormalOnly)?;
    Ok(assemble_with(
        space,
        coeffs,
        VolumeForm::Brinkman,
        Nitsche::Tangential,
    ))
}

/// Brinkman with normal (and, on Dirichlet edges, tangential) data imposed
/// weakly. The pressure enters the boundary terms only through the velocity
/// test functions, so the matrix is not symmetric.
pub fn assemble_nitsche_slip(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Brinkman, space.mesh())?;
    expect_mode(space, Model::Brinkman, ConstraintMode::Unconstrained)?;
    Ok(assemble_with(
        space,
        coeffs,
        VolumeForm::Brinkman,
        Nitsche::Slip,
    ))
}

fn expect_mode(space: &FeSpace, model: Model, mode: ConstraintMode) -> Result<(), AssemblyError> {
    if space.mode() == mode {
        Ok(())
    } else {
        Err(AssemblyError::UnsupportedMode {
            model,
            mode: space.mode(),
        })
    }
}

/// Elasticity in mixed form: `p = -lambda div u` is an unknown in the
/// piecewise constants and `(p, q) / lambda` is subtracted in its rows. The
/// divergence of the space lies in the piecewise constants, so the
/// displacement is the one of [`assemble_elasticity`]; unlike the primal
/// system this one stays well scaled as `lambda` grows.
pub fn assemble_elasticity_mixed(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
) -> Result<SaddleSystem, AssemblyError> {
    coeffs.validate(Model::Elasticity, space.mesh())?;
    expect_mode(space, Model::Elasticity, ConstraintMode::FullDirichlet)?;
    if !(coeffs.lambda > 0.0 && coeffs.lambda.is_finite()) {
        return Err(AssemblyError::InvalidCoefficients(format!(
            "the mixed form needs 0 < lambda < inf, got {}",
            coeffs.lambda
        )));
    }
    let shear = ProblemCoefficients {
        lambda: 0.0,
        ..coeffs.clone()
    };
    Ok(assemble_blocks(
        space,
        &shear,
        VolumeForm::Elasticity,
        Nitsche::None,
        Some(1.0 / coeffs.lambda),
    ))
}

fn assemble_with(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
    volume: VolumeForm,
    nitsche: Nitsche,
) -> SaddleSystem {
    assemble_blocks(space, coeffs, volume, nitsche, None)
}

/// With `compliance` the pressure rows get `-compliance (p, q)` and no
/// mean-value multiplier.
fn assemble_blocks(
    space: &FeSpace,
    coeffs: &ProblemCoefficients,
    volume: VolumeForm,
    nitsche: Nitsche,
    compliance: Option<f64>,
) -> SaddleSystem {
    let mesh = space.mesh();
    let pressure = volume == VolumeForm::Brinkman || compliance.is_some();
    let nt = mesh.num_triangles();
    let layout = BlockLayout {
        velocity: space.num_free_velocity(),
        pressure: if pressure { nt } else { 0 },
        multiplier: usize::from(
            pressure && compliance.is_none() && !coeffs.boundary.has_traction_edge(mesh),
        ),
    };

    let rule = triangle_rule(4).expect("degree 4 rule exists");
    let line = gauss_legendre(5).expect("five-point rule exists");
    let rules = Rules {
        volume: &rule,
        line: &line,
    };
    let locals: Vec<_> = (0..nt)
        .into_par_iter()
        .map(|t| local_contribution(space, coeffs, volume, nitsche, pressure, &rules, t))
        .collect();

    // sequential scatter in triangle order keeps the result independent of
    // the thread count
    let links = space.links();
    let p0 = layout.pressure_offset();
    let mut rhs = vec![0.0; layout.total()];
    let mut triplets = Vec::with_capacity(nt * 100);
    for (t, loc) in locals.iter().enumerate() {
        let dofs = space.basis(t).dofs;
        for i in 0..dofs.len() {
            let Some((fi, ci)) = links[dofs[i]].free else {
                continue;
            };
            rhs[fi] += ci * loc.f[i];
            for j in 0..dofs.len() {
                let lj = links[dofs[j]];
                let kij = ci * loc.k[i][j];
                rhs[fi] -= kij * lj.offset;
                if let Some((fj, cj)) = lj.free {
                    triplets.push((fi, fj, kij * cj));
                }
            }
            if pressure {
                triplets.push((fi, p0 + t, ci * loc.b_row[i]));
            }
        }
        if pressure {
            rhs[p0 + t] += loc.g;
            for j in 0..dofs.len() {
                let lj = links[dofs[j]];
                rhs[p0 + t] -= loc.b_col[j] * lj.offset;
                if let Some((fj, cj)) = lj.free {
                    triplets.push((p0 + t, fj, cj * loc.b_col[j]));
                }
            }
            if let Some(c) = compliance {
                triplets.push((p0 + t, p0 + t, -c * mesh.triangle_area(t)));
            }
            if layout.multiplier == 1 {
                let m = layout.multiplier_offset();
                let area = mesh.triangle_area(t);
                triplets.push((p0 + t, m, area));
                triplets.push((m, p0 + t, area));
            }
        }
    }
    let n = layout.total();
    SaddleSystem {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
        rhs,
        layout,
        model: match volume {
            VolumeForm::Elasticity => Model::Elasticity,
            VolumeForm::Brinkman => Model::Brinkman,
        },
        symmetric: nitsche != Nitsche::Slip,
    }
}

/// Builds the space for the boundary data in `coeffs` and assembles `model` on it.
pub fn space_and_system(
    subdiv: Arc<SubdividedMesh>,
    mode: ConstraintMode,
    enrichment: Enrichment,
    coeffs: &ProblemCoefficients,
    model: Model,
) -> Result<(FeSpace, SaddleSystem), AssemblyError> {
    let space = build_space(subdiv, mode, enrichment, &coeffs.boundary)?;
    let system = assemble(&space, coeffs, model)?;
    Ok((space, system))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::vector_field;
    use crate::mesh::subdivide;
    use crate::solver::solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(n: usize) -> Arc<SubdividedMesh> {
        Arc::new(subdivide(&MacroMesh::unit_square(n).unwrap()).unwrap())
    }

    fn dirichlet(u: fn(Vec2) -> Vec2) -> BoundaryConditions {
        BoundaryConditions::everywhere(BoundaryCondition::Dirichlet(vector_field(u)))
    }

    fn quad_form(a: &CsrMatrix, x: &[f64]) -> f64 {
        a.mul_vec(x).iter().zip(x).map(|(y, x)| y * x).sum()
    }

    fn free_interpolant(space: &FeSpace, u: fn(Vec2) -> Vec2) -> Vec<f64> {
        space.restrict(&space.fortin_interpolate(u).unwrap())
    }

    /// Solves and returns the largest nodal velocity error against `u`.
    fn nodal_error(space: &FeSpace, system: &SaddleSystem, u: fn(Vec2) -> Vec2) -> f64 {
        let x = solve(system).unwrap().solution;
        let sol = system.field_solution(space, &x);
        let exact = space.fortin_interpolate(u).unwrap();
        sol.velocity
            .iter()
            .zip(&exact)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn rigid_motions_have_zero_energy() {
        let bcs = BoundaryConditions::everywhere(BoundaryCondition::free());
        let coeffs = ProblemCoefficients::elasticity(1.0, 100.0, zero_vector_field(), bcs.clone());
        let space = build_space(
            square(3),
            ConstraintMode::Unconstrained,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap();
        let system = assemble_elasticity(&space, &coeffs).unwrap();
        assert_eq!(system.layout.pressure, 0);
        let scale = system.matrix.max_abs();
        for u in [
            (|_| Vec2::new(1.0, 0.0)) as fn(Vec2) -> Vec2,
            |_| Vec2::new(0.0, 1.0),
            |p| Vec2::new(-p.y, p.x),
        ] {
            let x = free_interpolant(&space, u);
            let r = system.matrix.mul_vec(&x);
            assert!(r.iter().all(|v| v.abs() < 1e-12 * scale));
        }
        let x = free_interpolant(&space, |p| Vec2::new(p.x, 0.0));
        assert!(quad_form(&system.matrix, &x) > 1.0);
    }

    #[test]
    fn brinkman_matrix_is_symmetric() {
        let coeffs = ProblemCoefficients::brinkman(
            Coefficient::by_centroid(&MacroMesh::unit_square(3).unwrap(), |p| 1.0 + p.x),
            2.0,
            zero_vector_field(),
            zero_scalar_field(),
            BoundaryConditions::everywhere(BoundaryCondition::no_slip()),
        );
        let (_, system) = space_and_system(
            square(3),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap();
        assert!(system.symmetric);
        assert_eq!(system.layout.multiplier, 1);
        assert!(system.matrix.asymmetry() <= 1e-12 * system.matrix.max_abs());
    }

    #[test]
    fn pressure_rows_give_minus_divergence() {
        let bcs = BoundaryConditions::everywhere(BoundaryCondition::free());
        let coeffs = ProblemCoefficients::brinkman(
            1.0,
            0.0,
            zero_vector_field(),
            zero_scalar_field(),
            bcs.clone(),
        );
        let space = build_space(
            square(2),
            ConstraintMode::Unconstrained,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap();
        let system = assemble_brinkman(&space, &coeffs).unwrap();
        assert_eq!(system.layout.multiplier, 0);
        let mut x = free_interpolant(&space, |p| p);
        x.resize(system.layout.total(), 0.0);
        let y = system.matrix.mul_vec(&x);
        for t in 0..space.mesh().num_triangles() {
            let expected = -2.0 * space.mesh().triangle_area(t);
            assert!((y[system.layout.pressure_offset() + t] - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn velocity_block_is_positive_definite() {
        let coeffs = ProblemCoefficients::brinkman(
            0.5,
            3.0,
            zero_vector_field(),
            zero_scalar_field(),
            BoundaryConditions::everywhere(BoundaryCondition::no_slip()),
        );
        let (_, system) = space_and_system(
            square(3),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap();
        let a = system.matrix.leading(system.layout.velocity);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..a.nrows())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            assert!(quad_form(&a, &x) > 1e-8 * norm2);
        }
    }

    #[test]
    fn zero_viscosity_tangential_terms_vanish() {
        let bcs = dirichlet(|p| Vec2::new(p.y, 0.0));
        let coeffs = ProblemCoefficients::brinkman(
            0.0,
            1.0,
            zero_vector_field(),
            zero_scalar_field(),
            bcs.clone(),
        );
        let space = build_space(
            square(3),
            ConstraintMode::NormalOnly,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap();
        let weak = assemble_nitsche_brinkman_tangential(&space, &coeffs).unwrap();
        let plain = assemble_brinkman(&space, &coeffs).unwrap();
        assert_eq!(weak.matrix, plain.matrix);
        assert_eq!(weak.rhs, plain.rhs);
    }

    #[test]
    fn penalty_enters_linearly() {
        let bcs = dirichlet(|p| Vec2::new(p.y, p.x));
        let space = build_space(
            square(2),
            ConstraintMode::Unconstrained,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap();
        let matrix = |gamma: f64| {
            let c = ProblemCoefficients::elasticity(1.0, 5.0, zero_vector_field(), bcs.clone())
                .with_gamma(gamma);
            assemble_nitsche_elasticity(&space, &c)
                .unwrap()
                .matrix
                .to_dense()
        };
        let (k1, k2, k3) = (matrix(10.0), matrix(20.0), matrix(30.0));
        let mut changed = false;
        for i in 0..k1.len() {
            for j in 0..k1.len() {
                let d1 = k2[i][j] - k1[i][j];
                let d2 = k3[i][j] - k1[i][j];
                assert!((d2 - 2.0 * d1).abs() < 1e-10 * (1.0 + k3[i][j].abs()));
                changed |= d1.abs() > 1e-8;
            }
        }
        assert!(changed);
    }

    #[test]
    fn slip_formulation_is_not_symmetric() {
        let bcs = BoundaryConditions::everywhere(BoundaryCondition::no_penetration());
        let coeffs = ProblemCoefficients::brinkman(
            1.0,
            1.0,
            zero_vector_field(),
            zero_scalar_field(),
            bcs.clone(),
        );
        let space = build_space(
            square(2),
            ConstraintMode::Unconstrained,
            Enrichment::EdgeBubbles,
            &bcs,
        )
        .unwrap();
        let system = assemble(&space, &coeffs, Model::Brinkman).unwrap();
        assert!(!system.symmetric);
        assert!(system.matrix.asymmetry() > 1e-3);
        let a = system.matrix.leading(system.layout.velocity);
        assert!(a.asymmetry() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let coeffs = ProblemCoefficients::stokes(BoundaryConditions::everywhere(
            BoundaryCondition::no_slip(),
        ));
        let (_, system) = space_and_system(
            square(2),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap();
        assert!(system.rhs.iter().all(|&v| v == 0.0));
        let x = solve(&system).unwrap().solution;
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_viscosity_with_strong_dirichlet_is_rejected() {
        let coeffs = ProblemCoefficients::brinkman(
            0.0,
            1.0,
            zero_vector_field(),
            zero_scalar_field(),
            BoundaryConditions::everywhere(BoundaryCondition::no_slip()),
        );
        let err = space_and_system(
            square(1),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap_err();
        assert!(matches!(err, AssemblyError::ZeroViscosityDirichlet { .. }));
        assert!(err.to_string().contains("nitsche-tangential"));
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        let bcs = BoundaryConditions::everywhere(BoundaryCondition::no_slip());
        let coeffs = ProblemCoefficients::elasticity(1.0, 1.0, zero_vector_field(), bcs.clone());
        let err = space_and_system(
            square(1),
            ConstraintMode::NormalOnly,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Elasticity,
        )
        .unwrap_err();
        assert!(matches!(err, AssemblyError::UnsupportedMode { .. }));
        let bad = ProblemCoefficients::elasticity(-1.0, 1.0, zero_vector_field(), bcs.clone());
        assert!(matches!(
            space_and_system(
                square(1),
                ConstraintMode::FullDirichlet,
                Enrichment::EdgeBubbles,
                &bad,
                Model::Elasticity
            ),
            Err(AssemblyError::InvalidCoefficients(_))
        ));
        let bad = ProblemCoefficients::stokes(bcs).with_gamma(0.0);
        assert!(matches!(
            space_and_system(
                square(1),
                ConstraintMode::FullDirichlet,
                Enrichment::EdgeBubbles,
                &bad,
                Model::Brinkman
            ),
            Err(AssemblyError::InvalidCoefficients(_))
        ));
    }

    #[test]
    fn affine_flows_are_reproduced_in_every_mode() {
        let u: fn(Vec2) -> Vec2 = |p| Vec2::new(1.0 + p.x + 2.0 * p.y, 3.0 * p.x - p.y);
        let coeffs = ProblemCoefficients::brinkman(
            1.0,
            0.0,
            zero_vector_field(),
            zero_scalar_field(),
            dirichlet(u),
        );
        for mode in [
            ConstraintMode::FullDirichlet,
            ConstraintMode::NormalOnly,
            ConstraintMode::Unconstrained,
        ] {
            let (space, system) = space_and_system(
                square(2),
                mode,
                Enrichment::EdgeBubbles,
                &coeffs,
                Model::Brinkman,
            )
            .unwrap();
            assert!(nodal_error(&space, &system, u) < 1e-9, "{mode:?}");
        }
    }

    #[test]
    fn affine_displacements_are_reproduced_by_nitsche() {
        let u: fn(Vec2) -> Vec2 = |p| Vec2::new(p.x + 2.0 * p.y, 3.0 * p.x - p.y + 0.5);
        let coeffs = ProblemCoefficients::elasticity(1.0, 1e4, zero_vector_field(), dirichlet(u));
        for mode in [ConstraintMode::FullDirichlet, ConstraintMode::Unconstrained] {
            let (space, system) = space_and_system(
                square(2),
                mode,
                Enrichment::EdgeBubbles,
                &coeffs,
                Model::Elasticity,
            )
            .unwrap();
            assert!(nodal_error(&space, &system, u) < 1e-8, "{mode:?}");
        }
    }

    #[test]
    fn traction_edge_removes_the_multiplier() {
        let bcs = BoundaryConditions::new()
            .on("right", BoundaryCondition::free())
            .otherwise(BoundaryCondition::no_slip());
        let coeffs = ProblemCoefficients::stokes(bcs);
        let (_, system) = space_and_system(
            square(2),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap();
        assert_eq!(system.layout.multiplier, 0);
        let stripped = system.without_multiplier();
        assert_eq!(stripped.layout, system.layout);
    }

    #[test]
    fn missing_multiplier_is_a_pressure_singularity() {
        let coeffs = ProblemCoefficients::stokes(BoundaryConditions::everywhere(
            BoundaryCondition::no_slip(),
        ));
        let (_, system) = space_and_system(
            square(2),
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &coeffs,
            Model::Brinkman,
        )
        .unwrap();
        let err = solve(&system.without_multiplier()).unwrap_err();
        assert!(matches!(
            err,
            crate::solver::SolverError::Singular { block: "pressure" }
        ));
    }

    #[test]
    fn mixed_elasticity_matches_primal() {
        let sub = square(4);
        let f = vector_field(|p| Vec2::new(p.y.sin(), p.x * p.x));
        for lambda in [1.0, 1e3, 1e7] {
            let bcs = dirichlet(|p| Vec2::new(0.1 * p.x * p.y, -0.2 * p.x));
            let coeffs = ProblemCoefficients::elasticity(1.5, lambda, f.clone(), bcs);
            let space = build_space(
                sub.clone(),
                ConstraintMode::FullDirichlet,
                Enrichment::EdgeBubbles,
                &coeffs.boundary,
            )
            .unwrap();
            let primal = assemble_elasticity(&space, &coeffs).unwrap();
            let mixed = assemble_elasticity_mixed(&space, &coeffs).unwrap();
            assert_eq!(mixed.layout.pressure, space.mesh().num_triangles());
            assert_eq!(mixed.layout.multiplier, 0);
            assert!(mixed.matrix.asymmetry() < 1e-12 * mixed.matrix.max_abs());
            let xp =
                crate::solver::solve_with(&primal, crate::solver::Acceptance::WorkingPrecision)
                    .unwrap();
            let xm = solve(&mixed).unwrap();
            let up = primal.field_solution(&space, &xp.solution);
            let um = mixed.field_solution(&space, &xm.solution);
            let scale = up.velocity.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (a, b) in up.velocity.iter().zip(&um.velocity) {
                assert!((a - b).abs() < 1e-8 * scale, "lambda {lambda}");
            }
            // the pressure is -lambda times the macro divergence
            let div = space.divergence(&um.velocity);
            for (p, d) in um.pressure.iter().zip(&div) {
                assert!((p + lambda * d).abs() < 1e-8 * (1.0 + p.abs()));
            }
        }
        let bcs = dirichlet(|_| Vec2::ZERO);
        let zero = ProblemCoefficients::elasticity(1.0, 0.0, f, bcs);
        let space = build_space(
            sub,
            ConstraintMode::FullDirichlet,
            Enrichment::EdgeBubbles,
            &zero.boundary,
        )
        .unwrap();
        assert!(assemble_elasticity_mixed(&space, &zero).is_err());
    }
}
