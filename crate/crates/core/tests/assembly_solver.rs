use std::sync::Arc;

use mce::assembly::{assemble, assemble_elasticity_mixed, Model, ProblemCoefficients};
use mce::bench::divergence_defect;
use mce::boundary::{scalar_field, vector_field, BoundaryCondition, BoundaryConditions};
use mce::geometry::Vec2;
use mce::mesh::{subdivide, MacroMesh};
use mce::solver::{galerkin_residual, solve};
use mce::space::{build_space, project_p0, ConstraintMode, Enrichment, FeSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brinkman(
    mu: f64,
    sigma: f64,
    g: fn(Vec2) -> f64,
    mode: ConstraintMode,
) -> (FeSpace, ProblemCoefficients) {
    let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(4).unwrap()).unwrap());
    let bcs = BoundaryConditions::everywhere(BoundaryCondition::no_slip());
    let coeffs = ProblemCoefficients::brinkman(
        mu,
        sigma,
        vector_field(|p| Vec2::new(1.0 + p.y, -p.x * p.x)),
        scalar_field(g),
        bcs,
    );
    let space = build_space(subdiv, mode, Enrichment::EdgeBubbles, &coeffs.boundary).unwrap();
    (space, coeffs)
}

fn elasticity(mu: f64, lambda: f64) -> (FeSpace, ProblemCoefficients) {
    let subdiv = Arc::new(subdivide(&MacroMesh::unit_square(3).unwrap()).unwrap());
    let bcs = BoundaryConditions::new()
        .on("left", BoundaryCondition::no_slip())
        .otherwise(BoundaryCondition::Traction(vector_field(|_| {
            Vec2::new(0.0, -1.0)
        })));
    let coeffs =
        ProblemCoefficients::elasticity(mu, lambda, vector_field(|_| Vec2::new(0.0, -2.0)), bcs);
    let space = build_space(
        subdiv,
        ConstraintMode::FullDirichlet,
        Enrichment::EdgeBubbles,
        &coeffs.boundary,
    )
    .unwrap();
    (space, coeffs)
}

fn zero_mean(p: Vec2) -> f64 {
    (p.x - 0.5) * (1.0 + p.y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_formulations_are_symmetric(mu in 0.01f64..10.0, sigma in 0.0f64..10.0, lambda in 0.0f64..1e4) {
        for mode in [ConstraintMode::FullDirichlet, ConstraintMode::NormalOnly] {
            let (space, coeffs) = brinkman(mu, sigma, zero_mean, mode);
            let a = assemble(&space, &coeffs, Model::Brinkman).unwrap().matrix;
            prop_assert!(a.asymmetry() < 1e-12 * a.max_abs());
        }
        let (space, coeffs) = elasticity(mu, lambda);
        let a = assemble(&space, &coeffs, Model::Elasticity).unwrap().matrix;
        prop_assert!(a.asymmetry() < 1e-12 * a.max_abs());
    }

    #[test]
    fn velocity_block_is_positive_semidefinite(mu in 0.01f64..10.0, sigma in 0.0f64..10.0, seed in any::<u64>()) {
        let (space, coeffs) = brinkman(mu, sigma, zero_mean, ConstraintMode::FullDirichlet);
        let sys = assemble(&space, &coeffs, Model::Brinkman).unwrap();
        let a = sys.matrix.leading(sys.layout.velocity);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let v: Vec<f64> = (0..a.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let av = a.mul_vec(&v);
            let q: f64 = av.iter().zip(&v).map(|(x, y)| x * y).sum();
            let vv: f64 = v.iter().map(|x| x * x).sum();
            prop_assert!(q >= -1e-10 * a.max_abs() * vv);
        }
    }

    #[test]
    fn solves_satisfy_galerkin_orthogonality_and_local_conservation(mu in 0.05f64..5.0, sigma in 0.0f64..5.0, seed in any::<u64>()) {
        for mode in [ConstraintMode::FullDirichlet, ConstraintMode::NormalOnly, ConstraintMode::Unconstrained] {
            let (space, coeffs) = brinkman(mu, sigma, zero_mean, mode);
            let sys = assemble(&space, &coeffs, Model::Brinkman).unwrap();
            let report = solve(&sys).unwrap();
            prop_assert!(report.relative_residual < 1e-9);
            prop_assert!(galerkin_residual(&sys.matrix, &report.solution, &sys.rhs, 20, seed) < 1e-9);
            let u = sys.field_solution(&space, &report.solution);
            if mode == ConstraintMode::Unconstrained {
                // the weak normal condition leaves the divergence shifted by the multiplier
                let m = report.solution[sys.layout.multiplier_offset()];
                let g = project_p0(zero_mean, space.mesh());
                for (d, g) in space.divergence(&u.velocity).iter().zip(&g) {
                    prop_assert!((d - g - m).abs() < 1e-9);
                }
            } else {
                prop_assert!(divergence_defect(&space, &u.velocity, zero_mean) < 1e-9, "{mode:?}");
            }
        }
    }
}

#[test]
fn single_threaded_solves_are_bitwise_deterministic() {
    let (space, coeffs) = brinkman(1.0, 1.0, zero_mean, ConstraintMode::FullDirichlet);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let run = || {
        pool.install(|| {
            let sys = assemble(&space, &coeffs, Model::Brinkman).unwrap();
            solve(&sys).unwrap().solution
        })
    };
    let a = run();
    let b = run();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn thread_count_does_not_change_the_system() {
    let (space, coeffs) = brinkman(0.3, 2.0, zero_mean, ConstraintMode::NormalOnly);
    let build = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| assemble(&space, &coeffs, Model::Brinkman).unwrap())
    };
    let (a, b) = (build(1), build(3));
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
}

#[test]
fn mixed_elasticity_meets_the_residual_tolerance_for_large_lambda() {
    for lambda in [1.0, 1e4, 1e8] {
        let (space, coeffs) = elasticity(1.0, lambda);
        let sys = assemble_elasticity_mixed(&space, &coeffs).unwrap();
        let report = solve(&sys).unwrap();
        assert!(report.relative_residual < 1e-9, "lambda {lambda}");
        let u = sys.field_solution(&space, &report.solution);
        // p = -lambda div u, so the divergence shrinks like 1 / lambda
        let div = space.divergence(&u.velocity);
        for (p, d) in u.pressure.iter().zip(&div) {
            assert!(
                (d + p / lambda).abs() < 1e-11 * (1.0 + p.abs()),
                "lambda {lambda}"
            );
        }
    }
}
