//! Manufactured solutions with their data and boundary conditions.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{Model, ProblemCoefficients};
use crate::boundary::{
    scalar_field, vector_field, BoundaryCondition, BoundaryConditions, ScalarField, VectorField,
};
use crate::geometry::{Mat2, Vec2};
use crate::mesh::{MacroMesh, MeshError};
use crate::space::ConstraintMode;

pub type TensorField = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;

/// Exact fields and data on the unit square.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub model: Model,
    pub velocity: VectorField,
    pub velocity_gradient: TensorField,
    /// `None` for elasticity.
    pub pressure: Option<ScalarField>,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub body_force: VectorField,
    pub source: ScalarField,
    pub boundary: BoundaryConditions,
    pub mode: ConstraintMode,
    pub gamma: f64,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("model", &self.model)
            .field("mu", &self.mu)
            .field("sigma", &self.sigma)
            .field("lambda", &self.lambda)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

fn stokes_velocity(p: Vec2) -> Vec2 {
    Vec2::new(
        20.0 * p.x * p.y.powi(3),
        5.0 * p.x.powi(4) - 5.0 * p.y.powi(4),
    )
}

fn stokes_gradient(p: Vec2) -> Mat2 {
    Mat2::new([
        [20.0 * p.y.powi(3), 60.0 * p.x * p.y * p.y],
        [20.0 * p.x.powi(3), -20.0 * p.y.powi(3)],
    ])
}

fn stokes_laplacian(p: Vec2) -> Vec2 {
    Vec2::new(120.0 * p.x * p.y, 60.0 * (p.x * p.x - p.y * p.y))
}

fn darcy_velocity(p: Vec2) -> Vec2 {
    let (sx, sy) = ((PI * p.x).sin(), (PI * p.y).sin());
    Vec2::new(
        -PI * sx * sx * (2.0 * PI * p.y).sin(),
        PI * (2.0 * PI * p.x).sin() * sy * sy,
    )
}

fn darcy_gradient(p: Vec2) -> Mat2 {
    let (sx, sy) = ((PI * p.x).sin(), (PI * p.y).sin());
    let (s2x, s2y) = ((2.0 * PI * p.x).sin(), (2.0 * PI * p.y).sin());
    let pi2 = PI * PI;
    Mat2::new([
        [
            -pi2 * s2x * s2y,
            -2.0 * pi2 * sx * sx * (2.0 * PI * p.y).cos(),
        ],
        [
            2.0 * pi2 * (2.0 * PI * p.x).cos() * sy * sy,
            pi2 * s2x * s2y,
        ],
    ])
}

fn darcy_laplacian(p: Vec2) -> Vec2 {
    let pi3 = PI * PI * PI;
    Vec2::new(
        -2.0 * pi3 * (2.0 * PI * p.y).sin() * (2.0 * (2.0 * PI * p.x).cos() - 1.0),
        2.0 * pi3 * (2.0 * PI * p.x).sin() * (2.0 * (2.0 * PI * p.y).cos() - 1.0),
    )
}

/// Stokes flow with `u = (20xy^3, 5x^4 - 5y^4)`, `p = 60x^2y - 20y^3 - 5`,
/// `f = 0` and Dirichlet data from `u`.
pub fn case_stokes() -> ManufacturedCase {
    let u = vector_field(stokes_velocity);
    ManufacturedCase {
        name: "stokes",
        model: Model::Brinkman,
        velocity: u.clone(),
        velocity_gradient: Arc::new(stokes_gradient),
        pressure: Some(scalar_field(|p| {
            60.0 * p.y * p.x * p.x - 20.0 * p.y.powi(3) - 5.0
        })),
        mu: 1.0,
        sigma: 0.0,
        lambda: 0.0,
        body_force: vector_field(|_| Vec2::ZERO),
        source: scalar_field(|_| 0.0),
        boundary: BoundaryConditions::everywhere(BoundaryCondition::Dirichlet(u)),
        mode: ConstraintMode::FullDirichlet,
        gamma: crate::assembly::DEFAULT_GAMMA,
    }
}

/// Darcy flow (`mu = 0`, `sigma = 1`) with
/// `u = (-pi sin^2(pi x) sin(2 pi y), pi sin(2 pi x) sin^2(pi y))` and
/// `p = sin(pi x) - 2/pi`; `u` vanishes on the boundary.
pub fn case_darcy() -> ManufacturedCase {
    case_brinkman_darcy(0.0)
}

/// The Darcy solution with viscosity `mu` added to the model; the body force
/// is adjusted so the exact fields are unchanged. The normal component is
/// imposed strongly and the tangential one by Nitsche's method.
pub fn case_brinkman_darcy(mu: f64) -> ManufacturedCase {
    case_brinkman(mu, 1.0)
}

/// The Darcy fields as the solution of the Brinkman problem with coefficients
/// `mu` and `sigma`.
pub fn case_brinkman(mu: f64, sigma: f64) -> ManufacturedCase {
    let u = vector_field(darcy_velocity);
    ManufacturedCase {
        name: "darcy",
        model: Model::Brinkman,
        velocity: u.clone(),
        velocity_gradient: Arc::new(darcy_gradient),
        pressure: Some(scalar_field(|p| (PI * p.x).sin() - 2.0 / PI)),
        mu,
        sigma,
        lambda: 0.0,
        body_force: vector_field(move |p| {
            darcy_velocity(p) * sigma + Vec2::new(PI * (PI * p.x).cos(), 0.0)
                - darcy_laplacian(p) * mu
        }),
        source: scalar_field(|_| 0.0),
        boundary: BoundaryConditions::everywhere(BoundaryCondition::Dirichlet(u)),
        mode: ConstraintMode::NormalOnly,
        gamma: crate::assembly::DEFAULT_GAMMA,
    }
}

/// Linear elasticity with `mu = 1`, the divergence-free Stokes velocity as
/// displacement and `f = -lap(u)`, which does not depend on `lambda`.
pub fn case_elasticity(lambda: f64) -> ManufacturedCase {
    let u = vector_field(stokes_velocity);
    ManufacturedCase {
        name: "elasticity",
        model: Model::Elasticity,
        velocity: u.clone(),
        velocity_gradient: Arc::new(stokes_gradient),
        pressure: None,
        mu: 1.0,
        sigma: 0.0,
        lambda,
        body_force: vector_field(|p| -stokes_laplacian(p)),
        source: scalar_field(|_| 0.0),
        boundary: BoundaryConditions::everywhere(BoundaryCondition::Dirichlet(u)),
        mode: ConstraintMode::FullDirichlet,
        gamma: crate::assembly::DEFAULT_GAMMA,
    }
}

impl ManufacturedCase {
    pub fn mesh(&self, n: usize) -> Result<MacroMesh, MeshError> {
        MacroMesh::unit_square(n)
    }

    pub fn with_mode(mut self, mode: ConstraintMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn coefficients(&self) -> ProblemCoefficients {
        let c = match self.model {
            Model::Elasticity => ProblemCoefficients::elasticity(
                self.mu,
                self.lambda,
                self.body_force.clone(),
                self.boundary.clone(),
            ),
            Model::Brinkman => ProblemCoefficients::brinkman(
                self.mu,
                self.sigma,
                self.body_force.clone(),
                self.source.clone(),
                self.boundary.clone(),
            ),
        };
        c.with_gamma(self.gamma)
    }

    /// Largest residual of the governing equations at `samples` random points,
    /// each scaled by the size of the terms involved. Second derivatives and
    /// the pressure gradient come from central differences.
    pub fn consistency_residual(&self, samples: usize, seed: u64) -> f64 {
        const STEP: f64 = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = Vec2::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            let dx = [Vec2::new(STEP, 0.0), Vec2::new(0.0, STEP)];
            // d/dx_j of the gradient, central differences
            let dgrad: [Mat2; 2] = dx.map(|d| {
                ((self.velocity_gradient)(x + d) - (self.velocity_gradient)(x - d))
                    .scale(0.5 / STEP)
            });
            let lap = Vec2::new(
                dgrad[0].m[0][0] + dgrad[1].m[0][1],
                dgrad[0].m[1][0] + dgrad[1].m[1][1],
            );
            let grad_div = Vec2::new(dgrad[0].trace(), dgrad[1].trace());
            let grad = (self.velocity_gradient)(x);
            let f = (self.body_force)(x);
            let (momentum, scale) = match self.model {
                Model::Elasticity => {
                    let r = f + lap * self.mu + grad_div * (self.mu + self.lambda);
                    (
                        r,
                        f.norm() + self.mu * lap.norm() + (self.mu + self.lambda) * grad_div.norm(),
                    )
                }
                Model::Brinkman => {
                    let p = self
                        .pressure
                        .as_ref()
                        .expect("Brinkman cases carry a pressure");
                    let gp = Vec2::new(p(x + dx[0]) - p(x - dx[0]), p(x + dx[1]) - p(x - dx[1]))
                        / (2.0 * STEP);
                    let u = (self.velocity)(x);
                    let r = lap * (-self.mu) + u * self.sigma + gp - f;
                    (
                        r,
                        f.norm() + self.mu * lap.norm() + self.sigma * u.norm() + gp.norm(),
                    )
                }
            };
            worst = worst.max(momentum.norm() / scale.max(1.0));
            if self.model == Model::Brinkman {
                let g = (self.source)(x);
                worst = worst.max((grad.trace() - g).abs() / (grad.max_abs() + g.abs()).max(1.0));
            }
        }
        worst
    }
}
